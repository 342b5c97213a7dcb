#pragma once

// Periodic uniform lattice on [-L,L)^d, real fields sampled on it, discrete
// Fourier transforms (FFTW backed), L^p norms, shape-preserving cubic
// interpolation, the parabolic rescaling u -> u*, and initial data.
//
// Transform convention: the forward sum is unnormalized, the inverse carries
// 1/n^d; frequencies are xi_k = pi k / L for k in [-n/2, n/2).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fracburgers/common.hpp"

namespace fracburgers {

struct Grid {
    int dim = 1;
    double half_width = 1.0;  // L
    int n = 8;                // points per axis, power of two

    double spacing() const { return 2.0 * half_width / n; }
    std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
    double coord(int i) const { return -half_width + i * spacing(); }
    // signed frequency index for array position k
    int freq_index(int k) const { return k < n / 2 ? k : k - n; }
    double frequency(int k) const { return pi_ * freq_index(k) / half_width; }

    void validate() const {
        std::vector<std::string> bad;
        if (dim != 1 && dim != 2) bad.push_back("grid: dim must be 1 or 2, got " + std::to_string(dim));
        if (n < 8) bad.push_back("grid: n must be >= 8, got " + std::to_string(n));
        if ((n & (n - 1)) != 0) bad.push_back("grid: n must be a power of two, got " + std::to_string(n));
        if (!(half_width > 0.0)) bad.push_back("grid: L must be positive");
        if (!bad.empty()) throw ValidationError(bad);
    }

    bool operator==(const Grid&) const = default;

  private:
    static constexpr double pi_ = 3.14159265358979323846;
};

struct Field {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;
};

struct Spectrum {
    Grid grid;
    std::vector<std::complex<double>> coeffs;
};

inline Field make_field(const Grid& g, double time = 0.0) { return Field{g, std::vector<double>(g.size(), 0.0), time}; }

inline double max_value(const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); }
inline double min_value(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }

inline double cell_volume(const Grid& g) { return std::pow(g.spacing(), g.dim); }

// ---------------------------------------------------------------------------
// FFT backend. Plans are cached per (dim, n, direction) with their own
// scratch buffers; executions on a shared plan are serialized.

namespace detail {

class FftPlans {
  public:
    static void execute(const Grid& g, const std::complex<double>* in, std::complex<double>* out, int sign) {
        Entry& e = instance().entry(g, sign);
        std::lock_guard<std::mutex> lock(e.run);
        std::copy(in, in + g.size(), reinterpret_cast<std::complex<double>*>(e.buf_in));
        fftw_execute(e.plan);
        std::copy(reinterpret_cast<std::complex<double>*>(e.buf_out),
                  reinterpret_cast<std::complex<double>*>(e.buf_out) + g.size(), out);
    }

  private:
    struct Entry {
        fftw_plan plan = nullptr;
        fftw_complex* buf_in = nullptr;
        fftw_complex* buf_out = nullptr;
        std::mutex run;
    };

    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    Entry& entry(const Grid& g, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(g.dim, g.n, sign);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            auto e = std::make_unique<Entry>();
            e->buf_in = fftw_alloc_complex(g.size());
            e->buf_out = fftw_alloc_complex(g.size());
            // FFTW_ESTIMATE keeps planning deterministic run to run
            e->plan = (g.dim == 1)
                          ? fftw_plan_dft_1d(g.n, e->buf_in, e->buf_out, sign, FFTW_ESTIMATE)
                          : fftw_plan_dft_2d(g.n, g.n, e->buf_in, e->buf_out, sign, FFTW_ESTIMATE);
            it = plans_.emplace(key, std::move(e)).first;
        }
        return *it->second;
    }

    std::map<std::tuple<int, int, int>, std::unique_ptr<Entry>> plans_;
    std::mutex mutex_;
};

}  // namespace detail

inline Spectrum to_spectral(const Field& f) {
    Spectrum s{f.grid, std::vector<std::complex<double>>(f.grid.size())};
    std::vector<std::complex<double>> in(f.values.begin(), f.values.end());
    detail::FftPlans::execute(f.grid, in.data(), s.coeffs.data(), FFTW_FORWARD);
    return s;
}

inline Field from_spectral(const Spectrum& s, double time) {
    std::vector<std::complex<double>> out(s.grid.size());
    detail::FftPlans::execute(s.grid, s.coeffs.data(), out.data(), FFTW_BACKWARD);
    Field f = make_field(s.grid, time);
    const double scale = 1.0 / double(s.grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) f.values[i] = out[i].real() * scale;
    return f;
}

// ---------------------------------------------------------------------------
// Norms.

inline double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::domain_error("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 1.0) {
        for (double v : f.values) s += std::abs(v);
        return s * cell_volume(f.grid);
    }
    if (p == 2.0) {
        for (double v : f.values) s += v * v;
        return std::sqrt(s * cell_volume(f.grid));
    }
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * cell_volume(f.grid), 1.0 / p);
}

inline double mass(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * cell_volume(f.grid);
}

// ---------------------------------------------------------------------------
// Shape-preserving cubic interpolation. Node slopes come from the cubic
// through the four surrounding points and are then limited against the local
// secant (zeroed across extrema), so the interpolant never leaves the hull of
// its cell data and cannot manufacture negative values.

namespace detail {

inline double limited_slope(double d, double secant) {
    if (secant == 0.0) return 0.0;
    if (d * secant <= 0.0) return 0.0;
    return (std::abs(d) > 3.0 * std::abs(secant)) ? 3.0 * secant : d;
}

// derivative at window position o of the cubic through four unit-spaced nodes
inline double window_slope(const double y[4], int o) {
    switch (o) {
        case 0: return (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / 6.0;
        case 1: return (-2.0 * y[0] - 3.0 * y[1] + 6.0 * y[2] - y[3]) / 6.0;
        case 2: return (y[0] - 6.0 * y[1] + 3.0 * y[2] + 2.0 * y[3]) / 6.0;
        default: return (-2.0 * y[0] + 9.0 * y[1] - 18.0 * y[2] + 11.0 * y[3]) / 6.0;
    }
}

// evaluate within the cell [o, o+1] of a 4-node window at local u in [0,1)
inline double hermite_window(const double y[4], int o, double u) {
    const double y1 = y[o], y2 = y[o + 1];
    const double s = y2 - y1;
    const double d1 = limited_slope(window_slope(y, o), s);
    const double d2 = limited_slope(window_slope(y, o + 1), s);
    const double u2 = u * u, u3 = u2 * u;
    return y1 * (2.0 * u3 - 3.0 * u2 + 1.0) + y2 * (-2.0 * u3 + 3.0 * u2) + d1 * (u3 - 2.0 * u2 + u) +
           d2 * (u3 - u2);
}

// p is the fractional lattice coordinate in [0, n); the last half-open cell
// has no right node and degenerates to its left value
template <typename At>
double interp_axis(At&& at, int n, double p) {
    const int i = std::clamp(int(p), 0, n - 1);
    if (i == n - 1) return at(n - 1);
    const int a = std::clamp(i - 1, 0, n - 4);
    double w[4] = {at(a), at(a + 1), at(a + 2), at(a + 3)};
    return hermite_window(w, i - a, p - i);
}

}  // namespace detail

inline double interpolate(const Field& f, const std::vector<double>& x) {
    const Grid& g = f.grid;
    if (int(x.size()) != g.dim) throw std::invalid_argument("interpolate: point dimension mismatch");
    const double L = g.half_width, h = g.spacing();
    for (double c : x)
        if (!(c >= -L) || !(c < L)) throw std::domain_error("interpolate: point outside [-L, L)");

    if (g.dim == 1) {
        return detail::interp_axis([&](int i) { return f.values[i]; }, g.n, (x[0] + L) / h);
    }
    const double p1 = (x[0] + L) / h;
    auto row_value = [&](int i) {
        const double* row = f.values.data() + std::size_t(i) * g.n;
        return detail::interp_axis([&](int j) { return row[j]; }, g.n, (x[1] + L) / h);
    };
    return detail::interp_axis(row_value, g.n, p1);
}

// ---------------------------------------------------------------------------
// Parabolic rescaling u*(t,x) = t^{d/a} u(t, t^{1/a} x). Lattice points whose
// rescaled image leaves the interpolable box are masked to zero and counted;
// the valid half-width reports the surviving sub-box.

struct RescaledField {
    Field field;
    std::size_t masked_points = 0;
    double valid_half_width = 0.0;
};

inline RescaledField rescale_star(const Field& f, double alpha) {
    const double t = f.time;
    if (!(t > 0.0)) throw std::domain_error("rescale_star: field time must be positive");
    const Grid& g = f.grid;
    const double lambda = std::pow(t, 1.0 / alpha);
    const double scale = std::pow(t, double(g.dim) / alpha);
    const double margin = g.half_width - 2.0 * g.spacing();

    RescaledField out{make_field(g, t), 0, margin / lambda};
    std::vector<double> y(g.dim);
    for (int i = 0; i < g.n; ++i) {
        const double y1 = lambda * g.coord(i);
        if (g.dim == 1) {
            if (std::abs(y1) <= margin) {
                y[0] = y1;
                out.field.values[i] = scale * interpolate(f, y);
            } else {
                ++out.masked_points;
            }
            continue;
        }
        for (int j = 0; j < g.n; ++j) {
            const double y2 = lambda * g.coord(j);
            if (std::abs(y1) <= margin && std::abs(y2) <= margin) {
                y[0] = y1;
                y[1] = y2;
                out.field.values[std::size_t(i) * g.n + j] = scale * interpolate(f, y);
            } else {
                ++out.masked_points;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Initial data.

enum class DatumKind { gaussian_bump, box_indicator, heavy_tail, samples };

struct InitialDatumSpec {
    DatumKind kind = DatumKind::gaussian_bump;
    double mass = 1.0;                 // target L^1 mass M
    std::vector<double> center;        // defaults to the origin
    double width = 1.0;                // gaussian: sigma; box: half-extent
    double tail_gamma = 0.5;           // heavy_tail decay exponent
    std::vector<double> sample_values; // kind == samples

    // characteristic width used by the resolution check
    double resolution_width() const {
        switch (kind) {
            case DatumKind::gaussian_bump: return width;
            case DatumKind::box_indicator: return 2.0 * width;
            default: return 1.0;
        }
    }
};

inline Field make_u0(const InitialDatumSpec& spec, const Grid& grid) {
    grid.validate();
    std::vector<std::string> bad;
    if (!(spec.mass > 0.0)) bad.push_back("datum: mass must be positive");
    if (spec.kind != DatumKind::samples && !(spec.width > 0.0)) bad.push_back("datum: width must be positive");
    if (spec.kind == DatumKind::heavy_tail && !(spec.tail_gamma > 0.0))
        bad.push_back("datum: tail_gamma must be positive");
    if (spec.kind != DatumKind::samples && spec.resolution_width() < 4.0 * grid.spacing())
        bad.push_back("datum: unresolvable, width " + std::to_string(spec.resolution_width()) +
                      " < 4h = " + std::to_string(4.0 * grid.spacing()));
    if (spec.kind == DatumKind::samples && spec.sample_values.size() != grid.size())
        bad.push_back("datum: sample count does not match the grid");
    if (!spec.center.empty() && int(spec.center.size()) != grid.dim)
        bad.push_back("datum: center dimension mismatch");
    if (!bad.empty()) throw ValidationError(bad);

    std::vector<double> c(grid.dim, 0.0);
    for (std::size_t k = 0; k < spec.center.size(); ++k) c[k] = spec.center[k];

    Field f = make_field(grid, 0.0);
    auto fill = [&](auto&& shape) {
        for (int i = 0; i < grid.n; ++i) {
            if (grid.dim == 1) {
                f.values[i] = shape(grid.coord(i) - c[0], 0.0);
            } else {
                for (int j = 0; j < grid.n; ++j)
                    f.values[std::size_t(i) * grid.n + j] = shape(grid.coord(i) - c[0], grid.coord(j) - c[1]);
            }
        }
    };

    switch (spec.kind) {
        case DatumKind::gaussian_bump:
            fill([&](double dx, double dy) {
                return std::exp(-(dx * dx + dy * dy) / (2.0 * spec.width * spec.width));
            });
            break;
        case DatumKind::box_indicator:
            fill([&](double dx, double dy) {
                const bool in = dx >= -spec.width && dx < spec.width &&
                                (grid.dim == 1 || (dy >= -spec.width && dy < spec.width));
                return in ? 1.0 : 0.0;
            });
            break;
        case DatumKind::heavy_tail:
            fill([&](double dx, double dy) {
                const double r = std::sqrt(dx * dx + dy * dy);
                return 1.0 / (1.0 + std::pow(r, grid.dim + spec.tail_gamma));
            });
            break;
        case DatumKind::samples:
            f.values = spec.sample_values;
            for (double& v : f.values) v = std::max(v, 0.0);
            break;
    }

    const double m = mass(f);
    if (!(m > 0.0)) throw ValidationError("datum: sampled field has no mass");
    const double factor = spec.mass / m;
    for (double& v : f.values) v *= factor;
    return f;
}

}  // namespace fracburgers
