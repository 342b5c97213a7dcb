#pragma once

// Mild-solution solver for u_t - D^{a/2} u + b . grad(u^{q+1}) = 0 via the
// variation-of-constants form on each step,
//
//   u(t+dt) = P_dt u(t) - int_0^dt P_{dt-s} div(b u^{q+1}(t+s)) ds,
//
// discretized by an exponential predictor-corrector (trapezoid in s). A
// global Picard iteration on a coarse time mesh provides an independent
// discretization of the same fixed point for cross-checks, and a Cole-Hopf
// quadrature oracle covers the boundary case alpha=2, d=1, q=1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fracburgers/common.hpp"
#include "fracburgers/grid.hpp"
#include "fracburgers/semigroup.hpp"
#include "fracburgers/stable_kernel.hpp"

namespace fracburgers {

struct PicardParams {
    double tol = 1e-10;
    int max_iter = 50;
    int mesh_points = 64;
};

enum class SolverMode { production, validation };

struct SolverConfig {
    StabilityParams params;
    double q = 0.5;
    std::vector<double> b;
    InitialDatumSpec datum;
    Grid grid;
    double dt = 1e-2;  // upper bound; adaptivity only ever lowers it
    double t_end = 1.0;
    std::vector<double> save_times;
    bool dealias = true;
    bool adaptive = true;
    PicardParams picard;
    SolverMode mode = SolverMode::production;
    double clamp_budget = 1e-10;  // clamped mass per step, relative to M

    double critical_exponent() const { return (params.alpha - 1.0) / params.dim; }

    void validate() const {
        std::vector<std::string> bad;
        const double a = params.alpha;
        if (mode == SolverMode::production && !(a > 1.0 && a < 2.0))
            bad.push_back("solver: production mode requires alpha in (1,2), got " + std::to_string(a));
        if (mode == SolverMode::validation && !(a > 1.0 && a <= 2.0))
            bad.push_back("solver: validation mode requires alpha in (1,2], got " + std::to_string(a));
        if (params.dim != grid.dim) bad.push_back("solver: params.dim and grid.dim disagree");
        if (int(b.size()) != grid.dim) bad.push_back("solver: drift b must have dim components");
        const double q0 = critical_exponent();
        if (!(q >= q0 - 1e-12))
            bad.push_back("solver: q=" + std::to_string(q) + " violates the critical-exponent constraint q >= q0=(alpha-1)/d=" +
                          std::to_string(q0));
        if (!(dt > 0.0)) bad.push_back("solver: dt must be positive");
        if (!(t_end > 0.0)) bad.push_back("solver: t_end must be positive");
        if (!std::is_sorted(save_times.begin(), save_times.end()))
            bad.push_back("solver: save_times must be sorted");
        for (double s : save_times)
            if (!(s > 0.0) || s > t_end * (1.0 + 1e-12))
                bad.push_back("solver: save time " + std::to_string(s) + " outside (0, t_end]");
        if (datum.kind == DatumKind::heavy_tail && datum.tail_gamma > a)
            bad.push_back("solver: heavy-tail exponent gamma must lie in (0, alpha]");
        if (!(picard.tol > 0.0) || picard.max_iter < 1 || picard.mesh_points < 2)
            bad.push_back("solver: bad picard parameters");
        try {
            grid.validate();
        } catch (const ValidationError& e) {
            bad.insert(bad.end(), e.violations().begin(), e.violations().end());
        }
        if (!bad.empty()) throw ValidationError(bad);
    }
};

struct LedgerRow {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double mass = 0.0;
    double min_value = 0.0;  // before the nonnegativity clamp
    double max_value = 0.0;
    double clamped_mass = 0.0;
};

struct Trajectory {
    SolverConfig config;
    Field initial;
    std::vector<Field> snapshots;
    std::vector<LedgerRow> ledger;
    double initial_sup = 0.0;   // |u0|_inf
    double running_sup = 0.0;   // sup over steps of |u(t)|_inf
};

// ---------------------------------------------------------------------------
// Nonlinear flux div(b u^{q+1}), computed spectrally as i (b . xi) w^(xi)
// where w = max(u,0)^{q+1}. The field is clamped before the power; the
// divergence form makes the total integral vanish exactly.

namespace detail {

inline void pointwise_power(const std::vector<double>& u, double exponent, std::vector<double>& w) {
    w.resize(u.size());
    if (exponent == 2.0) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double v = std::max(u[i], 0.0);
            w[i] = v * v;
        }
    } else if (exponent == 1.5) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double v = std::max(u[i], 0.0);
            w[i] = v * std::sqrt(v);
        }
    } else {
        for (std::size_t i = 0; i < u.size(); ++i) w[i] = std::pow(std::max(u[i], 0.0), exponent);
    }
}

inline Spectrum flux_spectrum(const Field& f, double q, const std::vector<double>& b, bool dealias) {
    const Grid& g = f.grid;
    Field w = make_field(g, f.time);
    pointwise_power(f.values, q + 1.0, w.values);
    Spectrum s = to_spectral(w);
    const int cut = g.n / 3;
    if (g.dim == 1) {
        for (int k = 0; k < g.n; ++k) {
            if (dealias && std::abs(g.freq_index(k)) > cut) {
                s.coeffs[k] = 0.0;
                continue;
            }
            s.coeffs[k] *= std::complex<double>(0.0, b[0] * g.frequency(k));
        }
    } else {
        for (int k1 = 0; k1 < g.n; ++k1)
            for (int k2 = 0; k2 < g.n; ++k2) {
                auto& c = s.coeffs[std::size_t(k1) * g.n + k2];
                if (dealias && (std::abs(g.freq_index(k1)) > cut || std::abs(g.freq_index(k2)) > cut)) {
                    c = 0.0;
                    continue;
                }
                c *= std::complex<double>(0.0, b[0] * g.frequency(k1) + b[1] * g.frequency(k2));
            }
    }
    return s;
}

// cached multiplier exp(-dt |xi|^alpha), rebuilt when dt changes
struct MultiplierCache {
    double dt = -1.0;
    double alpha = 0.0;
    std::vector<double> values;

    const std::vector<double>& get(const Grid& g, double step, double a) {
        if (step == dt && a == alpha && values.size() == g.size()) return values;
        dt = step;
        alpha = a;
        values.resize(g.size());
        if (g.dim == 1) {
            for (int k = 0; k < g.n; ++k)
                values[k] = std::exp(-step * std::pow(std::abs(g.frequency(k)), a));
        } else {
            for (int k1 = 0; k1 < g.n; ++k1)
                for (int k2 = 0; k2 < g.n; ++k2) {
                    const double x1 = g.frequency(k1), x2 = g.frequency(k2);
                    values[std::size_t(k1) * g.n + k2] = std::exp(-step * std::pow(x1 * x1 + x2 * x2, 0.5 * a));
                }
        }
        return values;
    }
};

}  // namespace detail

inline Field nonlinear_flux(const Field& f, double q, const std::vector<double>& b, bool dealias = true) {
    if (!(q + 1.0 > 1.0)) throw std::domain_error("nonlinear_flux: q+1 must exceed 1");
    if (int(b.size()) != f.grid.dim) throw std::invalid_argument("nonlinear_flux: drift dimension mismatch");
    Field out = from_spectral(detail::flux_spectrum(f, q, b, dealias), f.time);
    for (double v : out.values)
        if (!std::isfinite(v)) throw NumericalError("nonlinear_flux: non-finite value encountered");
    return out;
}

// ---------------------------------------------------------------------------
// One exponential predictor-corrector step.
//   predictor: u_p  = P_dt u - dt P_dt N(u)
//   corrector: u+   = P_dt u - (dt/2) [P_dt N(u) + N(u_p)]

struct StepResult {
    Field field;            // clamped
    double min_before_clamp = 0.0;
    double clamped_mass = 0.0;
};

inline StepResult step(const Field& f, double dt, const SolverConfig& cfg,
                       detail::MultiplierCache* cache = nullptr) {
    const Grid& g = f.grid;
    detail::MultiplierCache local;
    const std::vector<double>& E = (cache ? *cache : local).get(g, dt, cfg.params.alpha);

    Spectrum su = to_spectral(f);
    Spectrum sn1 = detail::flux_spectrum(f, cfg.q, cfg.b, cfg.dealias);

    Spectrum pred{g, std::vector<std::complex<double>>(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k) pred.coeffs[k] = E[k] * (su.coeffs[k] - dt * sn1.coeffs[k]);
    Field u_p = from_spectral(pred, f.time + dt);

    Spectrum sn2 = detail::flux_spectrum(u_p, cfg.q, cfg.b, cfg.dealias);
    Spectrum corr{g, std::vector<std::complex<double>>(g.size())};
    for (std::size_t k = 0; k < g.size(); ++k)
        corr.coeffs[k] = E[k] * (su.coeffs[k] - 0.5 * dt * sn1.coeffs[k]) - 0.5 * dt * sn2.coeffs[k];
    Field u_new = from_spectral(corr, f.time + dt);

    StepResult r{std::move(u_new), 0.0, 0.0};
    double neg = 0.0, mn = 0.0;
    for (double& v : r.field.values) {
        if (!std::isfinite(v)) throw NumericalError("step: non-finite value at t=" + std::to_string(f.time));
        if (v < 0.0) {
            mn = std::min(mn, v);
            neg -= v;
            v = 0.0;
        }
    }
    r.min_before_clamp = mn;
    r.clamped_mass = neg * cell_volume(g);
    return r;
}

// ---------------------------------------------------------------------------
// Full time marching with save-time landing and step-size control: the step
// halves when the clamp budget or the per-step mass drift is violated and
// creeps back (capped at cfg.dt) after 50 clean steps.

inline Trajectory solve(const SolverConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.config = cfg;

    Field u = make_u0(cfg.datum, cfg.grid);
    traj.initial = u;
    traj.initial_sup = max_value(u);
    traj.running_sup = traj.initial_sup;
    const double M = lp_norm(u, 1.0);
    const double h = cfg.grid.spacing();
    const double b_norm = std::sqrt(std::inner_product(cfg.b.begin(), cfg.b.end(), cfg.b.begin(), 0.0));

    auto cfl_bound = [&](const Field& state) {
        if (b_norm == 0.0) return std::numeric_limits<double>::infinity();
        const double umax = max_value(state);
        if (umax <= 0.0) return std::numeric_limits<double>::infinity();
        return h / (4.0 * b_norm * std::pow(umax, cfg.q));
    };

    detail::MultiplierCache cache;
    const double dt_min = cfg.dt * std::pow(2.0, -20);
    double t = 0.0, dt_cur = cfg.dt;
    long step_idx = 0;
    int clean = 0;
    std::size_t save_idx = 0;

    while (save_idx < cfg.save_times.size() && cfg.save_times[save_idx] <= 0.0) ++save_idx;

    while (t < cfg.t_end * (1.0 - 1e-14)) {
        const double t_target =
            (save_idx < cfg.save_times.size()) ? std::min(cfg.save_times[save_idx], cfg.t_end) : cfg.t_end;
        double dt_eff = dt_cur;
        if (cfg.adaptive) dt_eff = std::min(dt_eff, cfl_bound(u));
        bool lands = false;
        if (t + dt_eff >= t_target * (1.0 - 1e-14)) {
            dt_eff = t_target - t;
            lands = true;
        }

        StepResult r = step(u, dt_eff, cfg, &cache);
        const double new_mass = lp_norm(r.field, 1.0);
        const double drift = std::abs(new_mass - mass(u)) / M;
        if (cfg.adaptive && (r.clamped_mass > cfg.clamp_budget * M || drift > 1e-10)) {
            dt_cur *= 0.5;
            clean = 0;
            if (dt_cur < dt_min)
                throw NumericalError("solve: step size collapsed below dt_min at t=" + std::to_string(t));
            continue;  // retry the step
        }

        u = std::move(r.field);
        t = lands ? t_target : t + dt_eff;
        u.time = t;
        ++step_idx;
        traj.running_sup = std::max(traj.running_sup, max_value(u));
        traj.ledger.push_back({step_idx, t, dt_eff, new_mass, r.min_before_clamp, max_value(u), r.clamped_mass});

        if (std::abs(new_mass - M) > 1e-8 * M)
            throw NumericalError("solve: ledger mass drifted by " + std::to_string((new_mass - M) / M) +
                                 " relative at t=" + std::to_string(t));

        if (cfg.adaptive && ++clean >= 50) {
            dt_cur = std::min(2.0 * dt_cur, cfg.dt);
            clean = 0;
        }

        while (save_idx < cfg.save_times.size() && t >= cfg.save_times[save_idx] * (1.0 - 1e-14)) {
            Field snap = u;
            snap.time = cfg.save_times[save_idx];
            traj.snapshots.push_back(std::move(snap));
            ++save_idx;
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Global Picard iteration for the mild solution on a coarse uniform mesh,
//   u^{k+1}(t) = P_t u0 - int_0^t P_{t-s} div(b (u^k)^{q+1}(s)) ds,
// trapezoid in s, started from u^0(t) = P_t u0. Independent of step()'s
// discretization; contraction only holds on short horizons.

inline Field picard_iterate(const Field& u0, double t_end, const SolverConfig& cfg, int* iterations = nullptr) {
    cfg.validate();
    if (!(t_end > 0.0)) throw std::domain_error("picard_iterate: t_end must be positive");
    const Grid& g = u0.grid;
    const int m = cfg.picard.mesh_points;
    const double dt = t_end / m;
    const double alpha = cfg.params.alpha;

    // multipliers for every gap j*dt
    std::vector<std::vector<double>> E(m + 1);
    detail::MultiplierCache cache;
    for (int j = 0; j <= m; ++j) E[j] = cache.get(g, j * dt, alpha);

    Spectrum s0 = to_spectral(u0);
    std::vector<Field> cur(m + 1);
    for (int j = 0; j <= m; ++j) {
        Spectrum sj{g, s0.coeffs};
        for (std::size_t k = 0; k < g.size(); ++k) sj.coeffs[k] *= E[j][k];
        cur[j] = from_spectral(sj, u0.time + j * dt);
    }

    double prev_delta = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int it = 1; it <= cfg.picard.max_iter; ++it) {
        std::vector<Spectrum> flux(m + 1);
        for (int j = 0; j <= m; ++j) flux[j] = detail::flux_spectrum(cur[j], cfg.q, cfg.b, cfg.dealias);

        double delta = 0.0;
        std::vector<Field> next(m + 1);
        next[0] = cur[0];
        for (int j = 1; j <= m; ++j) {
            Spectrum acc{g, std::vector<std::complex<double>>(g.size())};
            for (std::size_t k = 0; k < g.size(); ++k) acc.coeffs[k] = E[j][k] * s0.coeffs[k];
            for (int i = 0; i <= j; ++i) {
                const double w = (i == 0 || i == j) ? 0.5 * dt : dt;
                const auto& Eg = E[j - i];
                for (std::size_t k = 0; k < g.size(); ++k) acc.coeffs[k] -= w * Eg[k] * flux[i].coeffs[k];
            }
            next[j] = from_spectral(acc, u0.time + j * dt);
            double dj = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                dj = std::max(dj, std::abs(next[j].values[k] - cur[j].values[k]));
            delta = std::max(delta, dj);
        }
        cur = std::move(next);
        if (iterations) *iterations = it;
        if (delta < cfg.picard.tol) return cur[m];
        growth_streak = (delta > prev_delta) ? growth_streak + 1 : 0;
        if (growth_streak >= 3)
            throw NumericalError("picard_iterate: iteration diverging, horizon too long for contraction");
        prev_delta = delta;
    }
    throw NumericalError("picard_iterate: no convergence within max_iter");
}

// ---------------------------------------------------------------------------
// Cole-Hopf oracle for alpha=2, d=1, q=1:
//   u_t - u_xx + b (u^2)_x = 0  maps to the heat equation via
//   u = -(1/b) d/dx log(phi),  phi(0,x) = exp(-b int_{-inf}^x u0).
// phi is evolved by Gaussian quadrature with analytic tails outside the box.

inline Field cole_hopf_reference(const Field& u0, double t, double b_scalar) {
    if (u0.grid.dim != 1) throw std::domain_error("cole_hopf_reference: d=1 only");
    if (b_scalar == 0.0) throw std::domain_error("cole_hopf_reference: b must be nonzero");
    if (!(t > 0.0)) throw std::domain_error("cole_hopf_reference: t must be positive");
    const Grid& g = u0.grid;
    const double h = g.spacing(), L = g.half_width;
    const double M = mass(u0);

    // cumulative integral of u0 from -L, spectrally accurate for smooth data
    Spectrum s = to_spectral(u0);
    const double mean = s.coeffs[0].real() / double(g.n);
    Spectrum anti{g, std::vector<std::complex<double>>(g.size(), 0.0)};
    for (int k = 1; k < g.n; ++k)
        anti.coeffs[k] = s.coeffs[k] / std::complex<double>(0.0, g.frequency(k));
    Field A = from_spectral(anti, 0.0);
    std::vector<double> phi0(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double cumulative = mean * (g.coord(i) + L) + (A.values[i] - A.values[0]);
        phi0[i] = std::exp(-b_scalar * cumulative);
    }
    const double phi_right = std::exp(-b_scalar * M);  // limit value for x > L

    Field out = make_field(g, u0.time + t);
    const double inv_norm = 1.0 / std::sqrt(4.0 * pi * t);
    // window past which the Gaussian kernel has fully decayed; phi0 continues
    // analytically as 1 to the left of the box and exp(-bM) to the right, so
    // the lattice sum sees no boundary at all
    const int reach = int(std::ceil(26.0 * std::sqrt(t) / h)) + 2;
    auto phi0_ext = [&](int j) { return j < 0 ? 1.0 : (j >= g.n ? phi_right : phi0[j]); };
    for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        double phi = 0.0, phix = 0.0;
        for (int j = i - reach; j <= i + reach; ++j) {
            const double z = x - (-L + j * h);
            const double G = inv_norm * std::exp(-z * z / (4.0 * t));
            const double f0 = phi0_ext(j);
            phi += h * G * f0;
            phix += h * (-z / (2.0 * t)) * G * f0;
        }
        out.values[i] = -phix / (b_scalar * phi);
    }
    return out;
}

}  // namespace fracburgers
