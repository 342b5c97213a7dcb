#pragma once

// Free evolution operators of the fractional heat flow: P_t as the spectral
// multiplier exp(-t |xi|^alpha) on the periodic grid, its rescaled companion
// P*_t, and a free-space quadrature variant used to measure the error made by
// periodizing a problem posed on all of R^d.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fracburgers/grid.hpp"
#include "fracburgers/stable_kernel.hpp"

namespace fracburgers {

inline void apply_multiplier(Spectrum& s, double t, double alpha) {
    const Grid& g = s.grid;
    if (g.dim == 1) {
        for (int k = 0; k < g.n; ++k) {
            const double xi = g.frequency(k);
            s.coeffs[k] *= std::exp(-t * std::pow(std::abs(xi), alpha));
        }
        return;
    }
    std::vector<double> xi2(g.n);
    for (int k = 0; k < g.n; ++k) xi2[k] = g.frequency(k) * g.frequency(k);
    for (int k1 = 0; k1 < g.n; ++k1)
        for (int k2 = 0; k2 < g.n; ++k2)
            s.coeffs[std::size_t(k1) * g.n + k2] *= std::exp(-t * std::pow(xi2[k1] + xi2[k2], 0.5 * alpha));
}

// P_t f; mass is conserved exactly (the zero-frequency multiplier is 1)
inline Field apply(const Field& f, double t, double alpha) {
    if (t < 0.0) throw std::domain_error("semigroup apply: negative time");
    if (t == 0.0) return f;
    Spectrum s = to_spectral(f);
    apply_multiplier(s, t, alpha);
    return from_spectral(s, f.time + t);
}

// (P*_t u0)(x) = t^{d/a} (P_t u0)(t^{1/a} x): rescaling after evolution
inline RescaledField apply_star(const Field& u0, double t, double alpha) {
    if (!(t > 0.0)) throw std::domain_error("apply_star: time must be positive");
    return rescale_star(apply(u0, t, alpha), alpha);
}

// Free-space P_t f by direct kernel quadrature, ignoring periodicity.
// O(n^2) in the point count; exists to bound the periodization error of
// apply(), not to be fast.
inline Field apply_direct(const Field& f, double t, double alpha) {
    if (!(t > 0.0)) throw std::domain_error("apply_direct: time must be positive");
    const Grid& g = f.grid;
    const StabilityParams prm{alpha, g.dim};
    const double h = g.spacing();
    Field out = make_field(g, f.time + t);

    if (g.dim == 1) {
        // kernel at every lattice offset
        std::vector<double> ker(2 * g.n - 1);
        for (int m = -(g.n - 1); m <= g.n - 1; ++m) ker[m + g.n - 1] = density_radial(prm, t, m * h);
        for (int i = 0; i < g.n; ++i) {
            double s = 0.0;
            for (int j = 0; j < g.n; ++j) s += ker[i - j + g.n - 1] * f.values[j];
            out.values[i] = s * h;
        }
        return out;
    }

    std::vector<double> ker(std::size_t(2 * g.n - 1) * (2 * g.n - 1));
    for (int m1 = -(g.n - 1); m1 <= g.n - 1; ++m1)
        for (int m2 = -(g.n - 1); m2 <= g.n - 1; ++m2)
            ker[std::size_t(m1 + g.n - 1) * (2 * g.n - 1) + (m2 + g.n - 1)] =
                density_radial(prm, t, h * std::sqrt(double(m1) * m1 + double(m2) * m2));
    for (int i1 = 0; i1 < g.n; ++i1)
        for (int i2 = 0; i2 < g.n; ++i2) {
            double s = 0.0;
            for (int j1 = 0; j1 < g.n; ++j1) {
                const double* krow = ker.data() + std::size_t(i1 - j1 + g.n - 1) * (2 * g.n - 1) + (i2 + g.n - 1);
                const double* frow = f.values.data() + std::size_t(j1) * g.n;
                for (int j2 = 0; j2 < g.n; ++j2) s += krow[-j2] * frow[j2];
            }
            out.values[std::size_t(i1) * g.n + i2] = s * h * h;
        }
    return out;
}

}  // namespace fracburgers
