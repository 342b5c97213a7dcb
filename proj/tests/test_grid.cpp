#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "fracburgers/grid.hpp"
#include "fracburgers/stable_kernel.hpp"

using namespace fracburgers;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Field f = make_field(g);
    for (double& v : f.values) v = dist(rng);
    return f;
}
}  // namespace

TEST_CASE("transform round trip is exact to 1e-12 in L2") {
    for (Grid g : {Grid{1, 10.0, 256}, Grid{2, 5.0, 32}}) {
        Field f = random_field(g, 7);
        Field back = from_spectral(to_spectral(f), f.time);
        Field diff = f;
        for (std::size_t i = 0; i < f.values.size(); ++i) diff.values[i] -= back.values[i];
        CHECK(lp_norm(diff, 2.0) <= 1e-12 * lp_norm(f, 2.0));
    }
}

TEST_CASE("constant field transforms to a pure zero mode") {
    Grid g{1, 4.0, 64};
    Field f = make_field(g);
    for (double& v : f.values) v = 3.25;
    Spectrum s = to_spectral(f);
    CHECK(std::abs(s.coeffs[0] - std::complex<double>(3.25 * g.n, 0.0)) < 1e-10);
    for (int k = 1; k < g.n; ++k) CHECK(std::abs(s.coeffs[k]) < 1e-10);
}

TEST_CASE("pure cosine mode produces one symmetric coefficient pair") {
    Grid g{1, 4.0, 64};
    const int m = 5;
    const double k0 = pi * m / g.half_width;
    Field f = make_field(g);
    for (int i = 0; i < g.n; ++i) f.values[i] = std::cos(k0 * g.coord(i));
    Spectrum s = to_spectral(f);
    // the -L offset of the lattice contributes the parity factor (-1)^m
    const double want = (m % 2 == 0 ? 1.0 : -1.0) * g.n / 2.0;
    CHECK(std::abs(s.coeffs[m] - std::complex<double>(want, 0.0)) < 1e-9);
    CHECK(std::abs(s.coeffs[g.n - m] - std::complex<double>(want, 0.0)) < 1e-9);
    for (int k = 0; k < g.n; ++k) {
        if (k == m || k == g.n - m) continue;
        CHECK(std::abs(s.coeffs[k]) < 1e-9);
    }
}

TEST_CASE("lp_norm basics") {
    Grid g{1, 8.0, 128};
    Field z = make_field(g);
    for (double p : {1.0, 2.0, 3.5, inf}) CHECK(lp_norm(z, p) == 0.0);

    Field one_cell = make_field(g);
    one_cell.values[17] = 4.0;
    const double h = g.spacing();
    CHECK(lp_norm(one_cell, 1.0) == Catch::Approx(h * 4.0).epsilon(1e-14));
    CHECK(lp_norm(one_cell, 2.0) == Catch::Approx(std::sqrt(h) * 4.0).epsilon(1e-14));
    CHECK(lp_norm(one_cell, inf) == 4.0);
    CHECK_THROWS_AS(lp_norm(z, 0.5), std::domain_error);

    // discretized gaussian integrates to its closed-form mass
    Grid wide{1, 40.0, 2048};
    Field gauss = make_field(wide);
    for (int i = 0; i < wide.n; ++i) {
        const double x = wide.coord(i);
        gauss.values[i] = std::exp(-x * x / 2.0);
    }
    CHECK(std::abs(lp_norm(gauss, 1.0) - std::sqrt(2.0 * pi)) < 1e-8);
}

TEST_CASE("interpolation inequality |f|_p <= |f|_inf^{1-1/p} |f|_1^{1/p}") {
    for (unsigned seed : {1u, 2u, 3u}) {
        Grid g{1, 6.0, 256};
        Field f = random_field(g, seed);
        for (double& v : f.values) v = std::abs(v);
        for (double p : {1.5, 2.0, 4.0}) {
            CHECK(lp_norm(f, p) <=
                  std::pow(lp_norm(f, inf), 1.0 - 1.0 / p) * std::pow(lp_norm(f, 1.0), 1.0 / p) + 1e-12);
        }
    }
}

TEST_CASE("interpolate is exact on lattice points and linear ramps") {
    Grid g{1, 4.0, 64};
    Field f = make_field(g);
    for (int i = 0; i < g.n; ++i) f.values[i] = 0.3 * g.coord(i) + 1.7;
    for (int i : {0, 5, 31, 62}) CHECK(interpolate(f, {g.coord(i)}) == f.values[i]);
    for (double x : {-3.91, -0.513, 1.77, 3.2}) {
        CHECK(std::abs(interpolate(f, {x}) - (0.3 * x + 1.7)) < 1e-12);
    }
    CHECK_THROWS_AS(interpolate(f, {4.0}), std::domain_error);
    CHECK_THROWS_AS(interpolate(f, {-4.0001}), std::domain_error);

    Grid g2{2, 4.0, 32};
    Field f2 = make_field(g2);
    for (int i = 0; i < g2.n; ++i)
        for (int j = 0; j < g2.n; ++j)
            f2.values[std::size_t(i) * g2.n + j] = 0.5 * g2.coord(i) - 0.25 * g2.coord(j) + 2.0;
    CHECK(std::abs(interpolate(f2, {1.3, -2.21}) - (0.5 * 1.3 - 0.25 * -2.21 + 2.0)) < 1e-12);
}

TEST_CASE("interpolate reproduces the stable profile to 1e-5 off-lattice") {
    Grid g{1, 20.0, 1024};
    StabilityParams prm{1.5, 1};
    Field f = make_field(g, 1.0);
    for (int i = 0; i < g.n; ++i) f.values[i] = density_radial(prm, 1.0, g.coord(i));
    for (double x : {0.017, 0.93, 2.502, 7.77}) {
        const double want = density_radial(prm, 1.0, x);
        CHECK(std::abs(interpolate(f, {x}) - want) <= 1e-5 * want);
    }
}

TEST_CASE("interpolate never overshoots the local data hull") {
    Grid g{1, 4.0, 64};
    Field f = random_field(g, 99);
    const double range = max_value(f) - min_value(f);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> xs(-4.0, 3.99);
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = xs(rng);
        const int i = std::clamp(int((x + g.half_width) / g.spacing()), 0, g.n - 2);
        const double lo = std::min(f.values[i], f.values[i + 1]);
        const double hi = std::max(f.values[i], f.values[i + 1]);
        const double v = interpolate(f, {x});
        CHECK(v >= lo - 1e-12 * range);
        CHECK(v <= hi + 1e-12 * range);
    }
}

TEST_CASE("rescale_star at t=1 is the identity") {
    Grid g{1, 10.0, 256};
    Field f = random_field(g, 5);
    f.time = 1.0;
    RescaledField r = rescale_star(f, 1.5);
    for (int i = 0; i < g.n; ++i) {
        if (std::abs(g.coord(i)) <= g.half_width - 2.0 * g.spacing())
            CHECK(r.field.values[i] == Catch::Approx(f.values[i]).margin(1e-14));
    }
}

TEST_CASE("rescale_star maps kernel snapshots onto the unit profile") {
    StabilityParams prm{1.5, 1};
    Grid g{1, 30.0, 2048};
    for (double t : {0.35, 0.8, 2.0}) {
        Field f = make_field(g, t);
        for (int i = 0; i < g.n; ++i) f.values[i] = density_radial(prm, t, g.coord(i));
        RescaledField r = rescale_star(f, 1.5);
        for (double x : {0.0, 0.5, 1.4, 3.3}) {
            const int i = int((x + g.half_width) / g.spacing());
            const double want = density_radial(prm, 1.0, g.coord(i));
            if (std::abs(g.coord(i)) <= r.valid_half_width)
                CHECK(std::abs(r.field.values[i] - want) <= 2e-5 * want);
        }
    }
}

TEST_CASE("rescale_star preserves mass on concentrated fields") {
    // the change-of-variables identity; stated for fields whose tail mass
    // beyond the rescaled box is negligible
    Grid g{1, 30.0, 2048};
    for (double t : {0.35, 1.0, 2.3}) {
        Field f = make_field(g, t);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.coord(i);
            f.values[i] = std::exp(-0.5 * x * x) * (1.0 + 0.3 * std::cos(x));
        }
        RescaledField r = rescale_star(f, 1.5);
        CHECK(std::abs(lp_norm(r.field, 1.0) - lp_norm(f, 1.0)) < 1e-6 * lp_norm(f, 1.0));
    }
}

TEST_CASE("make_u0 produces normalized nonnegative data") {
    Grid g{1, 40.0, 2048};
    InitialDatumSpec gauss{DatumKind::gaussian_bump, 1.0, {}, 1.0, 0.5, {}};
    Field u0 = make_u0(gauss, g);
    CHECK(std::abs(lp_norm(u0, 1.0) - 1.0) < 1e-10);
    CHECK(min_value(u0) >= 0.0);

    // aligned box: [-1,1) covers exactly 64 cells of h = 1/32
    Grid ag{1, 32.0, 2048};
    InitialDatumSpec box{DatumKind::box_indicator, 2.0, {}, 1.0, 0.5, {}};
    Field ub = make_u0(box, ag);
    CHECK(std::abs(lp_norm(ub, 1.0) - 2.0) < 1e-12);
    for (int i = 0; i < ag.n; ++i) {
        const double x = ag.coord(i);
        if (x >= -1.0 && x < 1.0) CHECK(ub.values[i] == Catch::Approx(1.0).epsilon(1e-12));
        else CHECK(ub.values[i] == 0.0);
    }

    InitialDatumSpec ht{DatumKind::heavy_tail, 3.0, {}, 1.0, 0.75, {}};
    Field uh = make_u0(ht, g);
    CHECK(std::abs(lp_norm(uh, 1.0) - 3.0) < 1e-10);
    // profile proportional to 1/(1+|x|^{d+gamma})
    const int i0 = g.n / 2, i1 = i0 + 256;  // x=0 and x=10
    const double x1 = g.coord(i1);
    CHECK(uh.values[i0] / uh.values[i1] ==
          Catch::Approx((1.0 + std::pow(std::abs(x1), 1.75))).epsilon(1e-10));

    InitialDatumSpec narrow{DatumKind::gaussian_bump, 1.0, {}, 0.05, 0.5, {}};
    CHECK_THROWS_AS(make_u0(narrow, g), ValidationError);
}

TEST_CASE("grid validation rejects bad lattices") {
    CHECK_THROWS_AS((Grid{1, 10.0, 48}).validate(), ValidationError);
    CHECK_THROWS_AS((Grid{1, 10.0, 4}).validate(), ValidationError);
    CHECK_THROWS_AS((Grid{3, 10.0, 64}).validate(), ValidationError);
    CHECK_THROWS_AS((Grid{1, -1.0, 64}).validate(), ValidationError);
}
