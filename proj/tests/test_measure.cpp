#include <catch_amalgamated.hpp>

#include "maent/measure.hpp"
#include "maent/radial.hpp"
#include "maent/sdot.hpp"
#include "test_helpers.hpp"

using namespace maent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("subdifferential mass of the cone apex", "[measure]") {
    // grad|x|(0) is the closed unit disc, so the tiny ball at the origin
    // carries measure pi under f = 1
    const auto cone = make_pl_cone(2, 64);
    const auto one = DensitySpec::constant(2, 1.0);
    const auto est = ma_measure(TestSet::ball(Vec{0.0, 0.0}, 0.1), cone, one, 1.05);
    REQUIRE_THAT(est.value, WithinRel(M_PI, 0.05));
}

TEST_CASE("linear gradient maps scale areas by a^2", "[measure]") {
    const auto one = DensitySpec::constant(2, 1.0);
    for (double a : {0.7, 1.0, 1.6}) {
        const auto q = make_pl_quadratic(2, a, 1.3, 48);
        for (double r : {0.35, 0.6}) {
            const auto est = ma_measure(TestSet::ball(Vec{0.0, 0.0}, r), q, one, a * 1.4);
            REQUIRE_THAT(est.value, WithinRel(M_PI * a * a * r * r, 0.05));
        }
    }
}

TEST_CASE("single affine piece carries no measure", "[measure]") {
    PLConvexFunction f(2);
    f.add_piece(Vec{0.3, 0.1}, 0.2);
    const auto one = DensitySpec::constant(2, 1.0);
    const auto est = ma_measure(TestSet::ball(Vec{0.1, 0.0}, 0.4), f, one, 1.0);
    REQUIRE(est.value <= 1e-3);
}

TEST_CASE("measure properties on random PL functions", "[measure][property]") {
    std::mt19937_64 rng(77);
    const auto one = DensitySpec::constant(2, 1.0);
    MeasureQuad quad;
    quad.y_res = 48;
    quad.x_res = 48;
    for (int trial = 0; trial < 12; ++trial) {
        const auto f = testing::random_pl(rng, 2, 4 + static_cast<int>(uniform01(rng) * 20));
        const double yr = f.max_slope_norm() + 0.05;

        SECTION("monotone in the set, trial " + std::to_string(trial)) {}
        const auto small = ma_measure(TestSet::ball(Vec{0.0, 0.0}, 0.3), f, one, yr, quad);
        const auto large = ma_measure(TestSet::ball(Vec{0.0, 0.0}, 0.6), f, one, yr, quad);
        REQUIRE(small.value <=
                large.value + small.quadrature_error + large.quadrature_error + 1e-9);

        // additivity on a split box
        const auto whole = ma_measure(TestSet::box(Vec{-0.5, -0.4}, Vec{0.5, 0.4}), f, one, yr, quad);
        const auto left = ma_measure(TestSet::box(Vec{-0.5, -0.4}, Vec{0.0, 0.4}), f, one, yr, quad);
        const auto right = ma_measure(TestSet::box(Vec{0.0, -0.4}, Vec{0.5, 0.4}), f, one, yr, quad);
        const double tol = 2.0 * (whole.quadrature_error + left.quadrature_error +
                                  right.quadrature_error) +
                           0.02 * whole.value + 1e-6;
        REQUIRE_THAT(left.value + right.value, WithinAbs(whole.value, tol));

        // invariant under adding a constant to phi
        PLConvexFunction shifted = f;
        {
            PLConvexFunction g(2);
            for (int i = 0; i < f.size(); ++i)
                g.add_piece(f.slope(i), f.intercept(i) + 0.37);
            shifted = g;
        }
        const auto est_shift =
            ma_measure(TestSet::ball(Vec{0.0, 0.0}, 0.45), shifted, one, yr, quad);
        const auto est_base = ma_measure(TestSet::ball(Vec{0.0, 0.0}, 0.45), f, one, yr, quad);
        REQUIRE_THAT(est_shift.value, WithinAbs(est_base.value, 1e-12 + 1e-9 * est_base.value));
    }
}

TEST_CASE("weak residual of exact pairs", "[measure]") {
    const auto one = DensitySpec::constant(2, 1.0);
    std::vector<TestSet> balls;
    for (double r : {0.2, 0.4, 0.6, 0.8, 1.0}) balls.push_back(TestSet::ball(Vec{0.0, 0.0}, r));

    SECTION("zero data: phi = 0, g = 0") {
        PLConvexFunction zero(2);
        zero.add_piece(Vec{0.0, 0.0}, 0.0);
        const auto rep = weak_residual(zero, one, DensitySpec::constant(2, 0.0), balls, 0.5);
        REQUIRE(rep.max_residual == 0.0);
    }
    SECTION("identity pair: fine PL quadratic, f = g = 1") {
        const auto q = make_pl_quadratic(2, 1.0, 1.4, 80);
        MeasureQuad quad;
        quad.y_res = 112;
        quad.x_res = 96;
        const auto rep = weak_residual(q, one, one, balls, 1.45, quad);
        REQUIRE(rep.max_residual <= 0.02);
    }
    SECTION("radial oracle pair: f = 1, g = 4r^2") {
        const auto g4 = DensitySpec::radial_poly(2, {{4.0, 2.0}});
        const auto sol = solve_radial(one, g4, 1.3, 800);
        const auto pl = pl_from_radial(sol, 192, 150);
        MeasureQuad quad;
        quad.y_res = 112;
        quad.x_res = 96;
        const auto rep = weak_residual(pl, one, g4, balls, sol.dphi.back() + 0.01, quad);
        REQUIRE(rep.max_residual <= 0.02);
    }
}

TEST_CASE("cell measures reproduce target masses", "[measure]") {
    // independent cross-validation of the transport solver: the estimator's
    // mass of each cell matches the matched target mass
    const int k = 2;
    const auto c8 = group_preset("cyclic:8");
    const PerturbedDensity fk(DensitySpec::constant(2, 1.0), k);
    const PerturbedDensity gk(DensitySpec::constant(2, 1.0), k);
    const double Rk = solve_Rk(fk, gk, k);
    const auto targets = sample_targets(fk, Rk, 32, c8, {}, ball_mass(gk, k));
    OTProblemInstance inst{gk, static_cast<double>(k), targets, Rk};
    SolveWeightsParams params;
    params.tol = 5e-4;
    params.grid_res = 128;
    const auto [phi, trace] = solve_weights(inst, c8, params);
    REQUIRE(trace.converged);

    MeasureQuad quad;
    quad.y_res = 96;
    quad.x_res = 96;
    quad.x_radius = k + 0.2;
    double total_check = 0.0;
    for (int i = 0; i < targets.count(); ++i) {
        const double cell = ma_measure_cell(phi, fk, i, Rk, quad);
        total_check += cell;
        REQUIRE_THAT(cell, WithinRel(targets.masses[i], 0.08));
    }
    REQUIRE_THAT(total_check, WithinRel(ball_mass(fk, Rk), 0.01));
}

TEST_CASE("equivariance of the measure under the group", "[measure]") {
    const auto c8 = group_preset("cyclic:8");
    const auto one = DensitySpec::constant(2, 1.0);
    const auto q = make_pl_quadratic(2, 1.0, 1.2, 40);  // radial, so K-invariant
    MeasureQuad quad;
    quad.y_res = 64;
    quad.x_res = 64;
    const Vec c{0.3, 0.2};
    const auto base = ma_measure(TestSet::ball(c, 0.25), q, one, 1.3, quad);
    for (const Mat& g : c8.elements) {
        const auto rotated = ma_measure(TestSet::ball(g.apply(c), 0.25), q, one, 1.3, quad);
        REQUIRE_THAT(rotated.value,
                     WithinAbs(base.value, 2.0 * (base.quadrature_error +
                                                  rotated.quadrature_error) +
                                               0.02 * base.value + 1e-9));
    }
}

TEST_CASE("weak convergence trend", "[measure]") {
    const auto tent = [](const double* x) {
        return std::max(0.0, 1.0 - std::hypot(x[0], x[1]));
    };
    const std::vector<std::function<double(const double*)>> hs = {tent};
    const auto one_fn = [](const double*) { return 1.0; };

    SECTION("constant sequence has zero discrepancy") {
        const auto q = make_pl_quadratic(2, 1.0, 1.2, 40);
        std::vector<PLConvexFunction> phis = {q, q, q};
        std::vector<std::function<double(const double*)>> fs = {one_fn, one_fn, one_fn};
        const auto res = weak_convergence_check(phis, fs, hs, q, one_fn, 1.0, 1.4);
        REQUIRE(res.max_discrepancy <= 1e-12);
    }
    SECTION("scaled quadratics approach the reference measure") {
        // omega(B, (1+1/j)|x|^2/2, 1) = (1+1/j)^2 |B| in the plane
        std::vector<PLConvexFunction> phis;
        std::vector<std::function<double(const double*)>> fs;
        for (int j : {1, 2, 4, 8}) {
            phis.push_back(make_pl_quadratic(2, 1.0 + 1.0 / j, 1.2, 48));
            fs.push_back(one_fn);
        }
        const auto ref = make_pl_quadratic(2, 1.0, 1.2, 48);
        const auto res = weak_convergence_check(phis, fs, hs, ref, one_fn, 1.0, 2.5);
        // discrepancy decreasing along the sequence
        std::vector<double> diffs;
        for (const auto& row : res.integrals)
            diffs.push_back(std::abs(row[0] - res.reference[0]));
        for (size_t j = 1; j < diffs.size(); ++j) REQUIRE(diffs[j] <= diffs[j - 1] + 1e-9);
        // closed form at the last entry: ratio (1+1/8)^2
        REQUIRE_THAT(res.integrals.back()[0] / res.reference[0],
                     WithinAbs(1.125 * 1.125, 0.06));
    }
    SECTION("f scaling is linear") {
        const auto q = make_pl_quadratic(2, 1.0, 1.2, 48);
        std::vector<PLConvexFunction> phis = {q, q, q};
        std::vector<std::function<double(const double*)>> fs;
        for (int j : {1, 2, 4})
            fs.push_back([j](const double*) { return 1.0 + 1.0 / j; });
        const auto res = weak_convergence_check(phis, fs, hs, q, one_fn, 1.0, 1.4);
        const double base = res.reference[0];
        REQUIRE_THAT(res.integrals[0][0], WithinRel(2.0 * base, 1e-9));
        REQUIRE_THAT(res.integrals[2][0], WithinRel(1.25 * base, 1e-9));
    }
}
