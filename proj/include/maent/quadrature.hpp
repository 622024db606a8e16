// Adaptive 1-D quadrature (15-point Gauss-Kronrod with interval bisection).
#pragma once

#include <functional>
#include <queue>

#include "maent/core.hpp"

namespace maent {

struct QuadSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_intervals = 4000;
};

namespace detail {

// QUADPACK 15-point Kronrod / 7-point Gauss pair on [-1,1]
inline void gk15(const std::function<double(double)>& f, double a, double b,
                 double& kronrod, double& err) {
    static const double xgk[8] = {0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
                                  0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
                                  0.2077849550078985, 0.0};
    static const double wgk[8] = {0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
                                  0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
                                  0.2044329400752989, 0.2094821410847278};
    static const double wg[4] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                                 0.4179591836734694};
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * xgk[j];
        const double fsum = f(c - x) + f(c + x);
        resk += wgk[j] * fsum;
        if (j % 2 == 1) resg += wg[j / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

}  // namespace detail

/// Integrate f over [a,b], optionally splitting first at interior breakpoints
/// (for piecewise-defined integrands such as tabulated densities).
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 const QuadSpec& spec = {},
                                 const std::vector<double>& breakpoints = {}) {
    if (!(b > a)) return 0.0;
    struct Interval {
        double a, b, value, err;
    };
    auto cmp = [](const Interval& x, const Interval& y) { return x.err < y.err; };
    std::priority_queue<Interval, std::vector<Interval>, decltype(cmp)> heap(cmp);

    std::vector<double> edges = {a};
    for (double t : breakpoints)
        if (t > a + 1e-300 && t < b - 1e-300) edges.push_back(t);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());

    double total = 0.0, total_err = 0.0;
    int count = 0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        Interval iv{edges[i], edges[i + 1], 0.0, 0.0};
        detail::gk15(f, iv.a, iv.b, iv.value, iv.err);
        total += iv.value;
        total_err += iv.err;
        heap.push(iv);
        ++count;
    }

    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (count >= spec.max_intervals)
            throw QuadratureFailure("integrate_adaptive: refinement budget exceeded");
        const Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Interval left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    return total;
}

}  // namespace maent
