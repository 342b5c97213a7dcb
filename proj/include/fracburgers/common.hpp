#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fracburgers {

// Configuration / precondition violations. Collects every violated invariant
// so a bad scenario file reports all problems at once. CLI exit code 2.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    explicit ValidationError(const std::string& one) : ValidationError(std::vector<std::string>{one}) {}
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "validation failed:";
        for (const auto& m : v) s += "\n  - " + m;
        return s;
    }
    std::vector<std::string> violations_;
};

// Runtime numerical failures (NaN propagation, step-size collapse,
// non-contracting fixed-point iterations). CLI exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace fracburgers
