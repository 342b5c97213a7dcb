#pragma once

// One-dimensional quadrature building blocks: Gauss-Legendre panels for
// smooth/oscillatory integrands, tanh-sinh (double exponential) rules for
// integrable endpoint singularities, and the few special functions the
// kernel evaluation needs (fast J0/J1, Beta).

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fracburgers {

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Gauss-Legendre rules, computed once per order by Newton iteration on P_n.

struct GaussLegendre {
    std::vector<double> node;    // on [-1,1]
    std::vector<double> weight;

    explicit GaussLegendre(int n) : node(n), weight(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    static const GaussLegendre& get(int n) {
        static std::map<int, GaussLegendre> cache;
        static std::mutex m;
        std::lock_guard<std::mutex> lock(m);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
        return it->second;
    }
};

template <typename F>
double gl_integrate(F&& f, double a, double b, const GaussLegendre& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.node.size(); ++i)
        s += rule.weight[i] * f(mid + half * rule.node[i]);
    return s * half;
}

template <typename F>
double composite_gl(F&& f, double a, double b, int panels, int order = 8) {
    const GaussLegendre& rule = GaussLegendre::get(order);
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * w, a + (p + 1) * w, rule);
    return s;
}

// ---------------------------------------------------------------------------
// tanh-sinh quadrature on (a,b). The integrand receives the abscissa plus its
// distances to both endpoints so that algebraic singularities like
// (b-x)^{-1/alpha} can be evaluated without cancellation.

namespace detail {

template <typename F>
double tanh_sinh_level(F&& f, double a, double b, int level) {
    const double half = 0.5 * (b - a);
    const double h = 1.0 / double(1 << level);
    const double t_max = 4.0;
    const long kmax = std::lround(std::floor(t_max / h));
    double sum = 0.0;
    for (long k = -kmax; k <= kmax; ++k) {
        const double t = k * h;
        const double w = 0.5 * pi * std::sinh(t);
        const double jac = 0.5 * pi * std::cosh(t) / std::pow(std::cosh(w), 2);
        if (!(jac > 1e-290)) continue;
        // 1 -+ tanh(w) evaluated without cancellation
        const double da = half * 2.0 / (1.0 + std::exp(-2.0 * w));
        const double db = half * 2.0 / (1.0 + std::exp(2.0 * w));
        if (!(da > 0.0) || !(db > 0.0)) continue;
        const double x = (da <= db) ? a + da : b - db;
        sum += jac * f(x, da, db);
    }
    return sum * h * half;
}

}  // namespace detail

// Adaptive level doubling; returns once two consecutive levels agree.
template <typename F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12, int max_level = 11) {
    double prev = detail::tanh_sinh_level(f, a, b, 2);
    for (int level = 3; level <= max_level; ++level) {
        double cur = detail::tanh_sinh_level(f, a, b, level);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + 1e-300) return cur;
        prev = cur;
    }
    return prev;
}

// Fixed-level variant, used where a check wants to measure refinement drift.
template <typename F>
double tanh_sinh_fixed(F&& f, double a, double b, int level) {
    return detail::tanh_sinh_level(f, a, b, level);
}

// Convenience wrapper for integrands that do not need endpoint distances.
template <typename F>
double tanh_sinh_plain(F&& f, double a, double b, double rel_tol = 1e-12, int max_level = 11) {
    return tanh_sinh([&](double x, double, double) { return f(x); }, a, b, rel_tol, max_level);
}

// ---------------------------------------------------------------------------
// Special functions.

inline double beta_function(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

namespace detail {

// Power series around 0, valid (and well conditioned) up to |x| ~ 8.
inline double bessel_j_series(int nu, double x) {
    const double q = 0.25 * x * x;
    double term = (nu == 0) ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < 60; ++k) {
        term *= -q / (double(k) * double(k + nu));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Bessel integral J_nu(x) = (1/pi) int_0^pi cos(nu*tau - x sin tau) dtau,
// resolved by a fixed high-order rule; used on the mid range.
inline double bessel_j_integral(int nu, double x) {
    const GaussLegendre& rule = GaussLegendre::get(96);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.node.size(); ++i) {
        const double tau = 0.5 * pi * (1.0 + rule.node[i]);
        s += rule.weight[i] * std::cos(nu * tau - x * std::sin(tau));
    }
    return s * 0.5;
}

// Hankel asymptotic expansion for large arguments.
inline double bessel_j_asymptotic(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double c = 1.0;       // running product (mu-1)(mu-9).../(m! 8^m)
    double p = 1.0, q = 0.0;
    double sign_p = -1.0, sign_q = 1.0;
    double xp = 1.0;
    for (int m = 1; m <= 12; ++m) {
        c *= (mu - double(2 * m - 1) * double(2 * m - 1)) / (8.0 * m);
        xp *= x;
        const double term = c / xp;
        if (std::abs(term) < 1e-18) break;
        if (m % 2 == 1) {
            q += sign_q * term;
            sign_q = -sign_q;
        } else {
            p += sign_p * term;
            sign_p = -sign_p;
        }
    }
    const double chi = x - (2 * nu + 1) * 0.25 * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

// Fast double-precision J0/J1. std::cyl_bessel_j is accurate but runs at
// microseconds per call, which is prohibitive inside the Hankel quadrature
// loops; this three-regime evaluation is a few tens of nanoseconds.
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x <= 8.0) return detail::bessel_j_series(0, x);
    if (x < 25.0) return detail::bessel_j_integral(0, x);
    return detail::bessel_j_asymptotic(0, x);
}

inline double bessel_j1(double x) {
    const double ax = std::abs(x);
    double v;
    if (ax <= 8.0)
        v = detail::bessel_j_series(1, ax);
    else if (ax < 25.0)
        v = detail::bessel_j_integral(1, ax);
    else
        v = detail::bessel_j_asymptotic(1, ax);
    return x < 0 ? -v : v;
}

// ---------------------------------------------------------------------------
// Least-squares line fit with coefficient of determination.

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 matching points");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit f;
    f.n_points = x.size();
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace fracburgers
