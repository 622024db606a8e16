#include <catch_amalgamated.hpp>

#include "maent/radial.hpp"

using namespace maent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("radial solver on closed-form pairs", "[radial]") {
    SECTION("f=g=1: phi(R)=R^2/2 in any dimension") {
        for (int n : {1, 2, 3}) {
            const auto one = DensitySpec::constant(n, 1.0);
            const auto sol = solve_radial(one, one, 1.5, 600);
            for (double r : {0.3, 0.75, 1.2}) {
                REQUIRE_THAT(sol.eval_dphi(r), WithinAbs(r, 2e-6));
                REQUIRE_THAT(sol.eval_phi(r), WithinAbs(0.5 * r * r, 2e-5));
            }
        }
    }
    SECTION("n=2, f=1, g=4r^2: phi'(R)=sqrt(2) R^2") {
        const auto sol = solve_radial(DensitySpec::constant(2, 1.0),
                                      DensitySpec::radial_poly(2, {{4.0, 2.0}}), 1.25, 1000);
        for (double r : {0.25, 0.5, 1.0}) {
            REQUIRE_THAT(sol.eval_dphi(r), WithinAbs(std::sqrt(2.0) * r * r, 5e-6));
            REQUIRE_THAT(sol.eval_phi(r), WithinAbs(std::sqrt(2.0) / 3.0 * r * r * r, 1e-5));
        }
    }
    SECTION("n=2, f=4r^2, g=1: phi'(R)=(R^2/2)^{1/4}") {
        const auto sol = solve_radial(DensitySpec::radial_poly(2, {{4.0, 2.0}}),
                                      DensitySpec::constant(2, 1.0), 1.0, 800);
        for (double r : {0.4, 0.8}) {
            REQUIRE_THAT(sol.eval_dphi(r), WithinAbs(std::pow(0.5 * r * r, 0.25), 1e-5));
        }
    }
    SECTION("phi' strictly increasing when g > 0") {
        const auto sol = solve_radial(DensitySpec::constant(2, 1.0),
                                      DensitySpec::radial_exp(2, 1.0, -1.0), 2.0, 400);
        for (size_t i = 1; i < sol.dphi.size(); ++i) REQUIRE(sol.dphi[i] > sol.dphi[i - 1]);
    }
}

TEST_CASE("radial residual check", "[radial]") {
    const std::vector<double> radii = {0.2, 0.4, 0.6, 0.8};
    SECTION("f=g=1 residual tiny at 1e3 steps") {
        const auto one = DensitySpec::constant(2, 1.0);
        const auto sol = solve_radial(one, one, 1.0, 1000);
        REQUIRE(residual_check(sol, one, one, radii) <= 1e-6);
    }
    SECTION("g=4r^2 residual dominated by finite differences") {
        const auto f = DensitySpec::constant(2, 1.0);
        const auto g = DensitySpec::radial_poly(2, {{4.0, 2.0}});
        const auto sol = solve_radial(f, g, 1.0, 1000);
        REQUIRE(residual_check(sol, f, g, radii) <= 1e-4);
    }
    SECTION("corrupted profile is flagged at the scaling level") {
        const auto one = DensitySpec::constant(2, 1.0);
        auto sol = solve_radial(one, one, 1.0, 1000);
        for (double& d : sol.dphi) d *= 1.1;
        for (double& p : sol.phi) p *= 1.1;
        const double res = residual_check(sol, one, one, radii);
        REQUIRE_THAT(res, WithinAbs(0.21, 0.02));  // 1.1^2 - 1
    }
}

TEST_CASE("radial conjugate inverts the derivative", "[radial]") {
    // (phi*)' = (phi')^{-1} on the range of phi'
    const auto f = DensitySpec::constant(2, 1.0);
    const auto g = DensitySpec::radial_poly(2, {{4.0, 2.0}});
    const auto sol = solve_radial(f, g, 1.0, 800);      // phi'(r) = sqrt2 r^2
    const auto dual = solve_radial(g, f, sol.dphi.back(), 800);  // swapped roles
    for (double r : {0.3, 0.6, 0.9}) {
        const double rho = sol.eval_dphi(r);
        REQUIRE_THAT(dual.eval_dphi(rho), WithinAbs(r, 5e-4));
    }
}

TEST_CASE("vanishing f is rejected", "[radial]") {
    // f = 0 on [0, 1/2], ramps up afterwards
    const auto f = DensitySpec::tabulated(2, {0.0, 0.5, 0.6, 2.0}, {0.0, 0.0, 1.0, 1.0});
    const auto g = DensitySpec::constant(2, 1.0);
    REQUIRE_THROWS_AS(solve_radial(f, g, 1.0, 100), InversionFailure);
}

TEST_CASE("PL sampling of a radial solution", "[radial]") {
    const auto one = DensitySpec::constant(2, 1.0);
    const auto sol = solve_radial(one, one, 1.2, 600);
    const auto pl = pl_from_radial(sol, 48, 40);
    for (double r : {0.2, 0.5, 0.9}) {
        const Vec x{r * std::cos(0.3), r * std::sin(0.3)};
        REQUIRE_THAT(pl.value(x), WithinAbs(0.5 * r * r, 2e-3));
        REQUIRE_THAT(norm(pl.gradient_select(x)), WithinAbs(r, 0.05));
    }
}
