#include <catch_amalgamated.hpp>

#include "maent/exhaustion.hpp"

using namespace maent;
using Catch::Matchers::WithinAbs;

namespace {

ExhaustionSchedule small_schedule(std::vector<int> ks, int targets_scale, int grid = 128) {
    ExhaustionSchedule s;
    s.k_values = std::move(ks);
    for (int k : s.k_values) s.targets_per_k.push_back(targets_scale * k);
    s.grid_res = grid;
    s.eval_radius = 1.0;
    s.eval_grid_res = 16;
    s.convergence_tol = 5e-2;
    return s;
}

}  // namespace

TEST_CASE("identity data reconstructs the quadratic", "[exhaustion]") {
    const auto one = DensitySpec::constant(2, 1.0);
    const auto c8 = group_preset("cyclic:8");
    const auto res = run_exhaustion(one, one, c8, small_schedule({2, 4}, 48));
    REQUIRE(res.status == ExhaustionStatus::Converged);
    REQUIRE(res.rows.size() == 2);

    double sup_err = 0.0;
    const size_t n_nodes = res.eval_nodes.size() / 2;
    for (size_t p = 0; p < n_nodes; ++p) {
        const double x0 = res.eval_nodes[2 * p], x1 = res.eval_nodes[2 * p + 1];
        const double q = 0.5 * (x0 * x0 + x1 * x1);
        sup_err = std::max(sup_err, std::abs(res.eval_values.back()[p] - q));
    }
    REQUIRE(sup_err <= 5e-2);

    SECTION("every iterate vanishes at the origin") {
        const Vec zero{0.0, 0.0};
        for (const auto& phi : res.iterates)
            REQUIRE_THAT(phi.value(zero), WithinAbs(0.0, 1e-12));
    }
    SECTION("iterates are K-invariant on the eval grid") {
        for (const auto& phi : res.iterates) {
            double viol = 0.0;
            for (const Mat& g : c8.elements)
                for (size_t p = 0; p < n_nodes; ++p) {
                    const Vec x{res.eval_nodes[2 * p], res.eval_nodes[2 * p + 1]};
                    viol = std::max(viol, std::abs(phi.value(g.apply(x)) - phi.value(x)));
                }
            REQUIRE(viol <= 1e-10);
        }
    }
    SECTION("iterates are convex along random segments") {
        std::mt19937_64 rng(3);
        const auto& phi = res.phi;
        for (int t = 0; t < 200; ++t) {
            const Vec a{uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0)};
            const Vec b{uniform_in(rng, -1.0, 1.0), uniform_in(rng, -1.0, 1.0)};
            const Vec mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
            REQUIRE(phi.value(mid) <= 0.5 * (phi.value(a) + phi.value(b)) + 1e-12);
        }
    }
    SECTION("bound monitor reports stability") {
        const auto rep = uniform_bound_monitor(res.rows, 1.0, 0.9);
        REQUIRE_FALSE(rep.growth_flagged);
        // sup norms near R^2/2 and slopes near R for the identity map
        REQUIRE_THAT(rep.sup_norms.back(), WithinAbs(0.5, 0.05));
        REQUIRE_THAT(rep.max_slopes.back(), WithinAbs(1.0, 0.25));
    }
}

TEST_CASE("radial data matches the independent oracle", "[exhaustion]") {
    const auto one = DensitySpec::constant(2, 1.0);
    const auto g4 = DensitySpec::radial_poly(2, {{4.0, 2.0}});
    const auto c8 = group_preset("cyclic:8");
    const auto res = run_exhaustion(one, g4, c8, small_schedule({2, 4, 8}, 40, 160));
    REQUIRE(res.rows.size() == 3);

    double sup_err = 0.0;
    const size_t n_nodes = res.eval_nodes.size() / 2;
    for (size_t p = 0; p < n_nodes; ++p) {
        const double r = std::hypot(res.eval_nodes[2 * p], res.eval_nodes[2 * p + 1]);
        const double expect = std::sqrt(2.0) / 3.0 * r * r * r;
        sup_err = std::max(sup_err, std::abs(res.eval_values.back()[p] - expect));
    }
    REQUIRE(sup_err <= 5e-2);
}

TEST_CASE("finite total mass surfaces as a hypothesis violation", "[exhaustion]") {
    // f = exp(-r) has finite total mass; slopes on B_2 blow up with k and the
    // run must stop with the violation status
    const auto f = DensitySpec::radial_exp(2, 1.0, -1.0);
    const auto one = DensitySpec::constant(2, 1.0);
    auto sched = small_schedule({2, 4, 8, 16}, 16);
    sched.eval_radius = 2.0;
    sched.slope_growth_window = 2;
    const auto res = run_exhaustion(f, one, group_preset("cyclic:8"), sched);
    REQUIRE(res.status == ExhaustionStatus::HypothesisViolation);
    // monotone blow-up trend over the flagged window
    const auto& rows = res.rows;
    REQUIRE(rows.size() >= 3);
    for (size_t j = rows.size() - 2; j < rows.size(); ++j)
        REQUIRE(rows[j].max_slope_BR >= 1.25 * rows[j - 1].max_slope_BR);
}

TEST_CASE("full rotation group runs through the radial path", "[exhaustion]") {
    const auto one = DensitySpec::constant(2, 1.0);
    const auto res =
        run_exhaustion(one, one, group_preset("full-rotation:2"), small_schedule({2, 4}, 32));
    REQUIRE(res.status == ExhaustionStatus::Converged);
    const size_t n_nodes = res.eval_nodes.size() / 2;
    double sup_err = 0.0;
    for (size_t p = 0; p < n_nodes; ++p) {
        const double x0 = res.eval_nodes[2 * p], x1 = res.eval_nodes[2 * p + 1];
        sup_err = std::max(sup_err,
                           std::abs(res.eval_values.back()[p] - 0.5 * (x0 * x0 + x1 * x1)));
    }
    REQUIRE(sup_err <= 2e-2);
}

TEST_CASE("reducible groups are rejected up front", "[exhaustion]") {
    const auto one = DensitySpec::constant(2, 1.0);
    REQUIRE_THROWS_AS(
        run_exhaustion(one, one, group_preset("neg-identity:2"), small_schedule({2, 4}, 32)),
        InvalidArgument);
}

TEST_CASE("cauchy extraction", "[exhaustion]") {
    SECTION("identical iterates extract at index zero") {
        const std::vector<std::vector<double>> vals = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
        const auto ex = cauchy_extract(vals, 1e-12);
        REQUIRE(ex.index == 0);
        REQUIRE(ex.pairwise[0][2] == 0.0);
    }
    SECTION("scaled quadratics extract once 1/k gaps shrink") {
        // iterates (1+1/k)|x|^2/2 on a radial grid, sup over B_1 of the
        // difference is |1/k - 1/k'| / 2
        std::vector<std::vector<double>> vals;
        for (int k : {1, 2, 4, 8, 16}) {
            std::vector<double> row;
            for (int i = 0; i <= 10; ++i) {
                const double r = i / 10.0;
                row.push_back((1.0 + 1.0 / k) * 0.5 * r * r);
            }
            vals.push_back(std::move(row));
        }
        const auto ex = cauchy_extract(vals, 0.05);
        REQUIRE(ex.index == 3);  // |1/4 - 1/16|/2 = 0.094 still above tol at index 2
        REQUIRE_THAT(ex.pairwise[0][1], WithinAbs(0.25, 1e-12));
    }
    SECTION("oscillation yields no index") {
        const std::vector<std::vector<double>> vals = {{0.0}, {1.0}, {0.0}, {1.0}};
        REQUIRE(cauchy_extract(vals, 0.1).index == -1);
    }
}
