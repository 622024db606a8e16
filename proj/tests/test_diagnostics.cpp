#include <catch_amalgamated.hpp>

#include "maent/diagnostics.hpp"

using namespace maent;
using Catch::Matchers::WithinAbs;

TEST_CASE("properness verdicts", "[diagnostics]") {
    SECTION("the quadratic is proper") {
        const auto q = make_pl_quadratic(2, 1.0, 3.2, 64);
        const auto rep = properness_check(q, {1.0, 2.0, 3.0});
        REQUIRE(rep.verdict == PropernessVerdict::ProperTrend);
        REQUIRE_THAT(rep.min_on_sphere[0], WithinAbs(0.5, 5e-3));
        REQUIRE_THAT(rep.min_on_sphere[1], WithinAbs(2.0, 5e-3));
        REQUIRE_THAT(rep.min_on_sphere[2], WithinAbs(4.5, 5e-3));
    }
    SECTION("a constant function is flat") {
        PLConvexFunction zero(2);
        zero.add_piece(Vec{0.0, 0.0}, 0.0);
        REQUIRE(properness_check(zero, {1.0, 2.0, 3.0}).verdict == PropernessVerdict::Flat);
    }
    SECTION("convex normalized functions have nondecreasing sphere minima") {
        std::mt19937_64 rng(4);
        for (int t = 0; t < 10; ++t) {
            PLConvexFunction f(2);
            for (int i = 0; i < 12; ++i) {
                const Vec y{uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0)};
                f.add_piece(y, uniform_in(rng, 0.0, 0.5));
            }
            const auto g = normalize_at_origin(f);
            const auto rep = properness_check(g, {0.5, 1.0, 1.5, 2.0});
            for (size_t j = 1; j < rep.min_on_sphere.size(); ++j)
                REQUIRE(rep.min_on_sphere[j] >= rep.min_on_sphere[j - 1] - 1e-12);
        }
    }
}

TEST_CASE("gradient-image density bounds", "[diagnostics]") {
    std::mt19937_64 rng(11);
    MeasureQuad quad;
    quad.y_res = 64;
    quad.x_res = 64;
    SECTION("identity gradient map gives ratios near one") {
        const auto q = make_pl_quadratic(2, 1.0, 2.0, 56);
        const auto b = eq4_bounds(q, 0.5, 6, rng, 1.6, quad);
        REQUIRE(b.lambda1 <= b.lambda2);
        REQUIRE(b.lambda1 >= 0.75);
        REQUIRE(b.lambda2 <= 1.3);
    }
    SECTION("scaling the quadratic scales the ratios by a^2") {
        const double a = 1.5;
        const auto q = make_pl_quadratic(2, a, 2.0, 56);
        const auto b = eq4_bounds(q, 0.7, 6, rng, 1.6, quad);
        REQUIRE(b.lambda1 >= a * a * 0.75);
        REQUIRE(b.lambda2 <= a * a * 1.3);
    }
    SECTION("empty sublevel is an error") {
        const auto q = make_pl_quadratic(2, 1.0, 2.0, 40);
        REQUIRE_THROWS_AS(eq4_bounds(q, -1.0, 4, rng, 1.5, quad), EmptySublevel);
    }
}

TEST_CASE("strict convexity probe", "[diagnostics]") {
    std::mt19937_64 rng(23);
    SECTION("quadratic gap at the probe scale") {
        // exact gap for |x|^2/2 on a length-L segment is L^2/8
        const auto q = make_pl_quadratic(2, 1.0, 1.6, 80);
        const auto probe = strict_convexity_probe(q, 400, rng, 1.0, 0.1);
        REQUIRE(probe.min_midpoint_gap > 0.0);
        REQUIRE_THAT(probe.min_midpoint_gap, WithinAbs(1.25e-3, 5e-4));
    }
    SECTION("affine functions have zero gap") {
        PLConvexFunction f(2);
        f.add_piece(Vec{0.4, -0.2}, 0.1);
        const auto probe = strict_convexity_probe(f, 100, rng, 1.0, 0.1);
        REQUIRE_THAT(probe.min_midpoint_gap, WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("holder exponent of the selected gradient", "[diagnostics]") {
    std::mt19937_64 rng(31);
    SECTION("quadratic fits beta near one") {
        const auto q = make_pl_quadratic(2, 1.0, 1.4, 48);
        const auto fit = holder_gradient_fit(q, 1.0, 400, rng);
        REQUIRE(fit.beta >= 0.95);
        REQUIRE_FALSE(fit.low_confidence);
    }
    SECTION("cubic radial profile still fits near one away from the origin") {
        // phi = (sqrt2/3)|x|^3 has gradient sqrt2 |x| x/|x|, Lipschitz on an
        // annulus, so the fitted exponent stays near 1
        PLConvexFunction f(2);
        for (int i = 1; i <= 40; ++i) {
            const double r = 1.2 * i / 40;
            for (int t = 0; t < 48; ++t) {
                const double a = 2.0 * M_PI * (t + 0.5) / 48;
                const Vec y{std::sqrt(2.0) * r * r * std::cos(a),
                            std::sqrt(2.0) * r * r * std::sin(a)};
                f.add_piece(y, r * std::sqrt(2.0) * r * r - std::sqrt(2.0) / 3.0 * r * r * r);
            }
        }
        const auto fit = holder_gradient_fit(f, 1.0, 400, rng);
        REQUIRE(fit.beta >= 0.85);
    }
    SECTION("the cone fit degenerates with low confidence") {
        const auto cone = make_pl_cone(2, 48);
        const auto fit = holder_gradient_fit(cone, 1.0, 400, rng);
        REQUIRE(fit.low_confidence);
    }
    SECTION("constant gradients raise InsufficientVariation") {
        PLConvexFunction f(2);
        f.add_piece(Vec{0.2, 0.0}, 0.0);
        REQUIRE_THROWS_AS(holder_gradient_fit(f, 1.0, 400, rng), InsufficientVariation);
    }
}

TEST_CASE("equivariance audit", "[diagnostics]") {
    const auto c8 = group_preset("cyclic:8");
    // an exactly C8-symmetric PL function: one orbit of slopes
    PLConvexFunction f(2);
    {
        const auto orb = orbit(Vec{0.7, 0.2}, c8);
        for (const Vec& y : orb.points) f.add_piece(y, 0.3);
    }
    std::vector<double> grid;
    for (int i = 0; i < 64; ++i) {
        grid.push_back(std::cos(0.1 + i));
        grid.push_back(std::sin(0.35 * i));
    }
    SECTION("symmetric construction passes at 1e-10") {
        const auto rep = equivariance_check(f, c8, grid);
        REQUIRE(rep.value_violation <= 1e-10);
    }
    SECTION("an injected intercept fault is detected") {
        PLConvexFunction bad(2);
        for (int i = 0; i < f.size(); ++i)
            bad.add_piece(f.slope(i), f.intercept(i) + (i == 2 ? 1e-3 : 0.0));
        const auto rep = equivariance_check(bad, c8, grid);
        REQUIRE(rep.value_violation >= 5e-4);
        REQUIRE(rep.value_violation <= 2e-3);
    }
    SECTION("radial functions are equivariant within interpolation error") {
        const auto q = make_pl_quadratic(2, 1.0, 1.4, 64);  // lattice-sampled, near-radial
        const auto rep = equivariance_check(q, c8, grid);
        REQUIRE(rep.value_violation <= 1e-3);
    }
}
