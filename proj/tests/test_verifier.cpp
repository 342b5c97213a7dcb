#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracburgers/verifier.hpp"

using namespace fracburgers;

namespace {

SolverConfig tiny_config() {
    SolverConfig cfg;
    cfg.params = {1.5, 1};
    cfg.q = 0.5;
    cfg.b = {1.0};
    cfg.datum = {DatumKind::gaussian_bump, 1.0, {}, 1.0, 0.5, {}};
    cfg.grid = {1, 40.0, 512};
    cfg.dt = 0.01;
    cfg.t_end = 0.1;
    cfg.save_times = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    return cfg;
}

}  // namespace

TEST_CASE("ratio_field basics") {
    Grid g{1, 10.0, 64};
    Field ref = make_field(g);
    for (int i = 0; i < g.n; ++i) ref.values[i] = std::exp(-0.1 * g.coord(i) * g.coord(i)) + 1e-12;
    Field u = ref;
    RatioField same = ratio_field(u, ref, 1e-8);
    CHECK(same.row.sup_ratio == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(same.row.inf_ratio == Catch::Approx(1.0).epsilon(1e-14));

    for (double& v : u.values) v *= 2.0;
    RatioField twice = ratio_field(u, ref, 1e-8);
    CHECK(twice.row.sup_ratio == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(twice.row.inf_ratio == Catch::Approx(2.0).epsilon(1e-14));

    // masked fraction grows with the floor
    RatioField lo = ratio_field(u, ref, 1e-10);
    RatioField hi = ratio_field(u, ref, 1e-2);
    CHECK(hi.row.masked_fraction > lo.row.masked_fraction);

    Field dead = make_field(g);
    CHECK_THROWS_AS(ratio_field(u, dead, 1e-8), std::domain_error);
}

TEST_CASE("b=0 wiring: ratio checks report their trivial values") {
    SolverConfig cfg = tiny_config();
    cfg.b = {0.0};
    Trajectory traj = solve(cfg);

    CheckResult two = check_two_sided(traj, {.floor = 1e-8, .refine = false});
    CHECK(two.pass);
    CHECK(std::abs(double(two.measured["C_emp"]) - 1.0) < 1e-8);

    CheckResult small = check_small_time(traj);
    CHECK(small.pass);
    CHECK(small.status == "trivial");

    CheckResult large = check_large_x(traj);
    CHECK(large.pass);
    CHECK(large.status == "trivial");
}

TEST_CASE("two-sided check measures a finite constant on a drifted run") {
    SolverConfig cfg = tiny_config();
    Trajectory traj = solve(cfg);
    CheckResult res = check_two_sided(traj, {.floor = 1e-8, .refine = false});
    const double C = res.measured["C_emp"];
    CHECK(res.pass);
    CHECK(C > 1.0);
    CHECK(C < 10.0);
}

TEST_CASE("small-time deviation shrinks monotonically toward zero") {
    SolverConfig cfg = tiny_config();
    Trajectory traj = solve(cfg);
    CheckResult res = check_small_time(traj);
    INFO(res.measured.dump());
    CHECK(res.pass);
    CHECK(res.status == "ok");
}

TEST_CASE("small-time deviation is linear in |b| at fixed time") {
    // first-order perturbation of the mild formula: e scales with the drift
    std::vector<double> bs = {0.02, 0.04, 0.08, 0.16};
    std::vector<double> es;
    for (double b : bs) {
        SolverConfig cfg = tiny_config();
        cfg.b = {b};
        cfg.save_times = {0.05};
        cfg.t_end = 0.05;
        Trajectory traj = solve(cfg);
        Field ref = apply(traj.initial, 0.05, cfg.params.alpha);
        es.push_back(ratio_field(traj.snapshots.back(), ref, 1e-8).row.sup_abs_dev);
    }
    std::vector<double> lb, le;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        lb.push_back(std::log(bs[i]));
        le.push_back(std::log(es[i]));
    }
    LinearFit fit = linear_fit(lb, le);
    CHECK(fit.r2 > 0.99);
    CHECK(fit.slope == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("rate check errors out on an underdetermined fit") {
    SolverConfig cfg = tiny_config();
    Trajectory traj = solve(cfg);  // no saves past t=1
    CHECK_THROWS_AS(check_large_time_rate(traj), ValidationError);
}

TEST_CASE("lp-decay check on the drift-free evolution") {
    SolverConfig cfg = tiny_config();
    cfg.b = {0.0};
    cfg.t_end = 10.0;
    cfg.dt = 0.05;
    cfg.save_times = {0.01, 0.1, 1.0, 2.0, 5.0, 10.0};
    Trajectory traj = solve(cfg);
    CheckResult res = check_lp_decay(traj);
    INFO(res.measured.dump());
    CHECK(res.pass);
    // closed-form scale for m_inf once self-similar: p(1,0) * M
    const double want = std::tgamma(1.0 + 1.0 / 1.5) / pi;
    CHECK(std::abs(double(res.measured["m_sup"]["inf"]) - want) / want < 0.2);
}

TEST_CASE("ustar vanishing on a kernel-primed drift-free run") {
    SolverConfig cfg = tiny_config();
    cfg.b = {0.0};
    Grid g = cfg.grid;
    StabilityParams prm{1.5, 1};
    std::vector<double> vals(g.size());
    for (int i = 0; i < g.n; ++i) vals[i] = density_radial(prm, 1.0, g.coord(i));
    Field proto{g, vals, 0.0};
    cfg.datum = {DatumKind::samples, mass(proto), {}, 1.0, 0.5, vals};
    cfg.save_times = {1e-4, 1e-3, 1e-2, 1e-1};
    Trajectory traj = solve(cfg);
    UstarOptions opts;
    opts.expected_slope = -(1.0 + 1.5);  // kernel tail exponent -(d+alpha)
    CheckResult res = check_ustar_vanishing(traj, opts);
    INFO(res.measured.dump());
    CHECK(res.pass);
}

TEST_CASE("C2 closed form matches quadrature, including the beta->0 limit") {
    // beta -> 0+: (1/a) B(1/a, 1-1/a) = pi / (a sin(pi/a))
    const double alpha = 1.5;
    const double want_limit = pi / (alpha * std::sin(pi / alpha));
    CHECK(std::abs(want_limit - 2.4183991523122905) < 1e-14);
    const double quad_limit = tanh_sinh(
        [&](double r, double, double db) {
            const double omr = -std::expm1(alpha * std::log1p(-db));
            return std::pow(omr, -1.0 / alpha);
        },
        0.0, 1.0, 1e-13, 12);
    CHECK(std::abs(quad_limit - want_limit) < 1e-10 * want_limit);
    // beta = 0.5 closed form against an external reference value
    const double c2 = (1.0 / alpha) * beta_function((1.0 - 0.5) / alpha, 1.0 - 1.0 / alpha);
    CHECK(std::abs(c2 - 3.5332775005708999) < 1e-12);
}

TEST_CASE("lemma identity holds on a gaussian bump") {
    Grid g{1, 40.0, 1024};
    InitialDatumSpec spec{DatumKind::gaussian_bump, 1.0, {}, 1.0, 0.5, {}};
    Field f = make_u0(spec, g);
    CheckResult res = check_lemma_identity(0.5, f, 1.0, 1.5);
    INFO(res.measured.dump());
    CHECK(res.pass);
    CHECK(double(res.measured["max_rel_err"]) < 1e-3);
    CHECK_THROWS_AS(check_lemma_identity(1.5, f, 1.0, 1.5), std::domain_error);
}

TEST_CASE("convolution inequality constants against external references") {
    CheckResult res = check_convolution_inequality(0.5, 1.5);
    REQUIRE(res.pass);
    const std::vector<double> got = res.measured["c"];
    // frozen high-precision values for (alpha, beta) = (1.5, 0.5)
    const std::vector<double> want = {3.329082558793401, 2.5742271323872658, 1.4450297191358115,
                                      0.66554429808840552};
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) < 1e-8 * want[i]);
}

TEST_CASE("kernel bundle passes for a production alpha and both closed forms") {
    for (double alpha : {1.0, 1.5}) {
        auto results = check_kernel(StabilityParams{alpha, 1});
        for (const CheckResult& r : results) {
            INFO(r.name << " alpha=" << alpha << " " << r.measured.dump());
            CHECK(r.pass);
        }
    }
    // envelope constants for alpha=1 (Cauchy) are known exactly:
    // ratio = (t+r)^{d+1} / (t^2+r^2)^{(d+1)/2} in [1, 2^{(d+1)/2}]
    auto cauchy = check_kernel(StabilityParams{1.0, 1});
    for (const CheckResult& r : cauchy) {
        if (r.name != "kernel-envelope-density") continue;
        CHECK(double(r.measured["c1"]) / (1.0 / pi) == Catch::Approx(1.0).epsilon(0.02));
        CHECK(double(r.measured["c2"]) / (2.0 / pi) == Catch::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("kernel bundle skips the heavy-tail envelopes at the gaussian boundary") {
    auto results = check_kernel(StabilityParams{2.0, 1});
    for (const CheckResult& r : results) {
        INFO(r.name << " " << r.measured.dump());
        CHECK(r.pass);
        if (r.name == "kernel-envelope-density" || r.name == "kernel-envelope-gradient" ||
            r.name == "kernel-drift-gradient")
            CHECK(r.status == "skipped");
    }
}
