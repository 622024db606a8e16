// The measure side of the weak formulation: omega(B, phi, f) estimated in
// gradient space, the weak-solution residual over a family of test sets, and
// the weak-convergence trend diagnostic for measure sequences.
//
// Membership is decided through the conjugate: a gradient-space node y lies
// in grad phi(B) iff some maximizer of <x,y> - phi(x) over the x-grid lies in
// B. A single sweep tracks the best value overall and the best value over
// x in B; y counts when the two agree within a tie tolerance.
#pragma once

#include <variant>

#include "maent/ballgrid.hpp"
#include "maent/density.hpp"
#include "maent/plconvex.hpp"

namespace maent {

// ---------------------------------------------------------------------------
// Test sets
// ---------------------------------------------------------------------------

struct BallSet {
    Vec center;
    double radius = 0.0;
};
struct AnnulusSet {
    Vec center;
    double r_inner = 0.0, r_outer = 0.0;
};
struct BoxSet {
    Vec lo, hi;
};

struct TestSet {
    std::variant<BallSet, AnnulusSet, BoxSet> shape;
    std::string label;

    int dimension() const {
        if (const auto* b = std::get_if<BallSet>(&shape)) return static_cast<int>(b->center.size());
        if (const auto* a = std::get_if<AnnulusSet>(&shape))
            return static_cast<int>(a->center.size());
        return static_cast<int>(std::get<BoxSet>(shape).lo.size());
    }

    bool contains(const double* x) const {
        if (const auto* b = std::get_if<BallSet>(&shape))
            return dist(x, b->center.data(), static_cast<int>(b->center.size())) <= b->radius;
        if (const auto* a = std::get_if<AnnulusSet>(&shape)) {
            const double d = dist(x, a->center.data(), static_cast<int>(a->center.size()));
            return d >= a->r_inner && d <= a->r_outer;
        }
        const auto& box = std::get<BoxSet>(shape);
        for (size_t j = 0; j < box.lo.size(); ++j)
            if (x[j] < box.lo[j] || x[j] > box.hi[j]) return false;
        return true;
    }

    /// Farthest distance from the origin to a point of the set.
    double extent() const {
        if (const auto* b = std::get_if<BallSet>(&shape)) return norm(b->center) + b->radius;
        if (const auto* a = std::get_if<AnnulusSet>(&shape)) return norm(a->center) + a->r_outer;
        const auto& box = std::get<BoxSet>(shape);
        double e = 0.0;
        for (size_t j = 0; j < box.lo.size(); ++j)
            e += std::max(box.lo[j] * box.lo[j], box.hi[j] * box.hi[j]);
        return std::sqrt(e);
    }

    static TestSet ball(Vec center, double radius, std::string label = {}) {
        if (radius <= 0.0) throw ConfigError("test set: ball radius must be positive");
        return TestSet{BallSet{std::move(center), radius}, std::move(label)};
    }
    static TestSet annulus(Vec center, double r_inner, double r_outer, std::string label = {}) {
        if (!(0.0 <= r_inner && r_inner < r_outer))
            throw ConfigError("test set: annulus needs 0 <= r_inner < r_outer");
        return TestSet{AnnulusSet{std::move(center), r_inner, r_outer}, std::move(label)};
    }
    static TestSet box(Vec lo, Vec hi, std::string label = {}) {
        if (lo.size() != hi.size()) throw ConfigError("test set: box corner mismatch");
        for (size_t j = 0; j < lo.size(); ++j)
            if (!(lo[j] < hi[j])) throw ConfigError("test set: empty box");
        return TestSet{BoxSet{std::move(lo), std::move(hi)}, std::move(label)};
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(6);
        if (const auto* b = std::get_if<BallSet>(&shape)) {
            os << "ball(c=(";
            for (size_t j = 0; j < b->center.size(); ++j)
                os << (j ? "," : "") << b->center[j];
            os << "),r=" << b->radius << ")";
        } else if (const auto* a = std::get_if<AnnulusSet>(&shape)) {
            os << "annulus(r=" << a->r_inner << ".." << a->r_outer << ")";
        } else {
            os << "box";
        }
        if (!label.empty()) os << "[" << label << "]";
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Exact-enough integrals of densities over test sets
// ---------------------------------------------------------------------------

/// int_B d(x) dx. Origin-centered balls/annuli use the radial reduction;
/// everything else goes through a smooth product rule around the set.
template <class Density>
double set_density_integral(const TestSet& set, const Density& d, int order = 96) {
    const int n = set.dimension();
    if (const auto* b = std::get_if<BallSet>(&set.shape)) {
        if (norm(b->center) <= 1e-14) return ball_mass(d, b->radius);
    }
    if (const auto* a = std::get_if<AnnulusSet>(&set.shape)) {
        if (norm(a->center) <= 1e-14) return ball_mass(d, a->r_outer) - ball_mass(d, a->r_inner);
    }
    if (n != 2) throw InvalidArgument("set_density_integral: off-center sets need n=2");

    if (const auto* box = std::get_if<BoxSet>(&set.shape)) {
        // midpoint product rule on a smooth integrand
        const int q = order;
        const double hx = (box->hi[0] - box->lo[0]) / q, hy = (box->hi[1] - box->lo[1]) / q;
        double s = 0.0;
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) {
                const double x[2] = {box->lo[0] + (i + 0.5) * hx, box->lo[1] + (j + 0.5) * hy};
                s += d.eval(x);
            }
        return s * hx * hy;
    }
    // polar rule around the set center
    Vec c;
    double r0 = 0.0, r1 = 0.0;
    if (const auto* b = std::get_if<BallSet>(&set.shape)) {
        c = b->center;
        r1 = b->radius;
    } else {
        const auto& a = std::get<AnnulusSet>(set.shape);
        c = a.center;
        r0 = a.r_inner;
        r1 = a.r_outer;
    }
    const int q = order;
    const double hr = (r1 - r0) / q, ht = 2.0 * M_PI / (2 * q);
    double s = 0.0;
    for (int i = 0; i < q; ++i) {
        const double r = r0 + (i + 0.5) * hr;
        for (int j = 0; j < 2 * q; ++j) {
            const double t = (j + 0.5) * ht;
            const double x[2] = {c[0] + r * std::cos(t), c[1] + r * std::sin(t)};
            s += d.eval(x) * r;
        }
    }
    return s * hr * ht;
}

// ---------------------------------------------------------------------------
// The Monge-Ampere measure estimate
// ---------------------------------------------------------------------------

struct MAMeasureEstimate {
    double value = 0.0;
    double quadrature_error = 0.0;
    TestSet set;
};

struct MeasureQuad {
    int y_res = 96;      // radial resolution of the gradient-space grid
    int x_res = 96;      // lattice steps per radius of the conjugate grid
    double x_radius = -1.0;  // <= 0: auto from the set extent
    bool refine_error = true;
};

namespace detail {

// conjugate x-grid: ball lattice plus a boundary shell
inline std::vector<double> conjugate_grid(int n, double radius, int res) {
    std::vector<double> xs = PLConvexFunction::ball_lattice(n, radius, res);
    const auto shell = sphere_ring(n, radius, n == 2 ? 8 * res : (n == 1 ? 2 : 4 * res * res));
    xs.insert(xs.end(), shell.begin(), shell.end());
    return xs;
}

template <class FDensity>
double ma_measure_pass(const TestSet& B, const PLConvexFunction& phi, const FDensity& f,
                       double y_radius, double x_radius, int y_res, int x_res) {
    const int n = phi.dimension();
    const std::vector<double> xs = conjugate_grid(n, x_radius, x_res);
    const size_t nx = xs.size() / n;
    std::vector<double> phix(nx);
    for (size_t p = 0; p < nx; ++p) phix[p] = phi.value(xs.data() + p * n);
    std::vector<char> in_set(nx);
    for (size_t p = 0; p < nx; ++p) in_set[p] = B.contains(xs.data() + p * n) ? 1 : 0;

    const BallGrid ygrid = build_ball_grid(n, y_radius, y_res);
    double total = 0.0;
    for (size_t q = 0; q < ygrid.count; ++q) {
        const double* y = ygrid.nodes.data() + q * n;
        double best = -std::numeric_limits<double>::infinity();
        double best_in = best;
        if (n == 2) {
            const double y0 = y[0], y1 = y[1];
            for (size_t p = 0; p < nx; ++p) {
                const double v = xs[2 * p] * y0 + xs[2 * p + 1] * y1 - phix[p];
                if (v > best) best = v;
                if (in_set[p] && v > best_in) best_in = v;
            }
        } else {
            for (size_t p = 0; p < nx; ++p) {
                const double v = dot(xs.data() + p * n, y, n) - phix[p];
                if (v > best) best = v;
                if (in_set[p] && v > best_in) best_in = v;
            }
        }
        // tie maximizers all checked: membership iff a maximizer sits in B
        if (best_in >= best - 1e-9 * (1.0 + std::abs(best)))
            total += f.eval(y) * ygrid.weights[q];
    }
    return total;
}

}  // namespace detail

/// Estimate of int_{grad phi(B)} f, computed in gradient space.
/// The quadrature error field is a one-refinement (half resolution)
/// difference, not a bound.
template <class FDensity>
MAMeasureEstimate ma_measure(const TestSet& B, const PLConvexFunction& phi, const FDensity& f,
                             double y_domain_radius, const MeasureQuad& quad = {}) {
    const int n = phi.dimension();
    if (B.dimension() != n) throw InvalidArgument("ma_measure: set/function dimension mismatch");
    if (y_domain_radius < phi.max_slope_norm() * (1.0 - 1e-12))
        throw InvalidArgument("ma_measure: y domain must cover the slope range");

    // any radius beyond the set works: a maximizer escaping the grid is
    // dominated by the boundary shell along the segment toward it
    const double x_radius =
        quad.x_radius > 0.0 ? quad.x_radius : 1.3 * B.extent() + 0.15;

    // only slopes attainable near B matter; clip the y-grid accordingly
    double y_eff = 0.0;
    {
        const auto probe = PLConvexFunction::ball_lattice(n, x_radius, 24);
        for (size_t p = 0; p < probe.size(); p += n)
            y_eff = std::max(y_eff, norm(phi.gradient_select(
                                             Vec(probe.begin() + p, probe.begin() + p + n))));
        y_eff = std::min(y_domain_radius, 1.2 * y_eff + 0.05);
    }

    MAMeasureEstimate est;
    est.set = B;
    est.value = detail::ma_measure_pass(B, phi, f, y_eff, x_radius, quad.y_res, quad.x_res);
    if (quad.refine_error) {
        const double coarse = detail::ma_measure_pass(B, phi, f, y_eff, x_radius,
                                                      std::max(quad.y_res / 2, 8),
                                                      std::max(quad.x_res / 2, 8));
        est.quadrature_error = std::abs(est.value - coarse);
    }
    return est;
}

/// Mass that the estimator assigns to the cell of one piece, for solver
/// cross-validation. Per gradient-space node the per-piece Fenchel gap
///     delta_j(y) = max_x [<x,y> - phi(x)] - max_{x in cell_j} [<x,y> - phi(x)]
/// is computed on the x-grid; every piece within the grid-displacement scale
/// h |y - y_j| of zero is a subdifferential candidate (its exact gap vanishes
/// at the shared corner), and the node belongs to the candidate with the
/// nearest slope. Deciding on the raw grid argmax instead is systematically
/// wrong at cell corners: the displaced maximizer prefers the cell whose
/// slope is farthest from y.
template <class FDensity>
double ma_measure_cell(const PLConvexFunction& phi, const FDensity& f, int piece,
                       double y_domain_radius, const MeasureQuad& quad = {}) {
    const int n = phi.dimension();
    const int m = phi.size();
    const double x_radius = quad.x_radius > 0.0 ? quad.x_radius : y_domain_radius + 0.1;
    const std::vector<double> xs = detail::conjugate_grid(n, x_radius, quad.x_res);
    const size_t nx = xs.size() / n;
    const double h_diag = std::sqrt(static_cast<double>(n)) * x_radius / quad.x_res;
    std::vector<double> phix(nx);
    std::vector<int> cell_of(nx);
    for (size_t p = 0; p < nx; ++p) {
        phix[p] = phi.value(xs.data() + p * n);
        cell_of[p] = phi.argmax_lowest(xs.data() + p * n);
    }
    const BallGrid ygrid = build_ball_grid(n, y_domain_radius, quad.y_res);
    std::vector<double> best_in_cell(m);
    double total = 0.0;
    for (size_t q = 0; q < ygrid.count; ++q) {
        const double* y = ygrid.nodes.data() + q * n;
        std::fill(best_in_cell.begin(), best_in_cell.end(),
                  -std::numeric_limits<double>::infinity());
        double best = -std::numeric_limits<double>::infinity();
        for (size_t p = 0; p < nx; ++p) {
            const double v = dot(xs.data() + p * n, y, n) - phix[p];
            if (v > best) best = v;
            if (v > best_in_cell[cell_of[p]]) best_in_cell[cell_of[p]] = v;
        }
        int owner = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            const double dy = dist(phi.slope(j), y, n);
            if (best - best_in_cell[j] > 2.0 * h_diag * std::max(dy, h_diag)) continue;
            if (dy < bd) { bd = dy; owner = j; }
        }
        if (owner == piece) total += f.eval(y) * ygrid.weights[q];
    }
    return total;
}

// ---------------------------------------------------------------------------
// Weak-solution residual
// ---------------------------------------------------------------------------

struct WeakResidualRow {
    TestSet set;
    double lhs = 0.0;    // int_B g
    double omega = 0.0;  // omega(B, phi, f)
    double quadrature_error = 0.0;
    double rel_residual = 0.0;
};

struct WeakResidualReport {
    std::vector<WeakResidualRow> rows;
    double max_residual = 0.0;
};

template <class FDensity, class GDensity>
WeakResidualReport weak_residual(const PLConvexFunction& phi, const FDensity& f,
                                 const GDensity& g, const std::vector<TestSet>& sets,
                                 double y_domain_radius, const MeasureQuad& quad = {}) {
    if (sets.empty()) throw InvalidArgument("weak_residual: no test sets");
    WeakResidualReport rep;
    for (const TestSet& B : sets) {
        WeakResidualRow row;
        row.set = B;
        row.lhs = set_density_integral(B, g);
        const auto est = ma_measure(B, phi, f, y_domain_radius, quad);
        row.omega = est.value;
        row.quadrature_error = est.quadrature_error;
        row.rel_residual = std::abs(row.lhs - row.omega) / std::max(row.lhs, 1e-12);
        rep.max_residual = std::max(rep.max_residual, row.rel_residual);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Weak-convergence trend of measure sequences
// ---------------------------------------------------------------------------

struct WeakConvergenceResult {
    std::vector<std::vector<double>> integrals;  // [sequence index][test function]
    std::vector<double> reference;               // [test function]
    double max_discrepancy = 0.0;                // last sequence entry vs reference
};

/// Riemann sums of int h d omega over a box partition of [-L,L]^2: one
/// conjugate sweep bins each gradient-space node by the box of its maximizer.
inline std::vector<double> measure_functionals(
    const PLConvexFunction& phi, const std::function<double(const double*)>& f,
    const std::vector<std::function<double(const double*)>>& hs, double domain_L,
    double y_radius, int boxes = 24, const MeasureQuad& quad = {}) {
    const int n = phi.dimension();
    const double x_radius = 1.5 * domain_L * std::sqrt(static_cast<double>(n)) + 0.1;
    const std::vector<double> xs = detail::conjugate_grid(n, x_radius, quad.x_res);
    const size_t nx = xs.size() / n;
    std::vector<double> phix(nx);
    for (size_t p = 0; p < nx; ++p) phix[p] = phi.value(xs.data() + p * n);

    const BallGrid ygrid = build_ball_grid(n, y_radius, quad.y_res);
    std::vector<double> acc(hs.size(), 0.0);
    const double h_box = 2.0 * domain_L / boxes;
    Vec center(n);
    for (size_t q = 0; q < ygrid.count; ++q) {
        const double* y = ygrid.nodes.data() + q * n;
        double best = -std::numeric_limits<double>::infinity();
        size_t argx = 0;
        for (size_t p = 0; p < nx; ++p) {
            const double v = dot(xs.data() + p * n, y, n) - phix[p];
            if (v > best) { best = v; argx = p; }
        }
        const double* xstar = xs.data() + argx * n;
        bool inside = true;
        for (int j = 0; j < n; ++j) {
            if (std::abs(xstar[j]) > domain_L) { inside = false; break; }
            const int bj = std::min(boxes - 1, static_cast<int>((xstar[j] + domain_L) / h_box));
            center[j] = -domain_L + (bj + 0.5) * h_box;
        }
        if (!inside) continue;
        const double fw = f(y) * ygrid.weights[q];
        for (size_t t = 0; t < hs.size(); ++t) acc[t] += hs[t](center.data()) * fw;
    }
    return acc;
}

inline WeakConvergenceResult weak_convergence_check(
    const std::vector<PLConvexFunction>& phis,
    const std::vector<std::function<double(const double*)>>& fs,
    const std::vector<std::function<double(const double*)>>& hs,
    const PLConvexFunction& phi_ref, const std::function<double(const double*)>& f_ref,
    double domain_L, double y_radius, int boxes = 24, const MeasureQuad& quad = {}) {
    if (phis.size() < 2) throw InvalidArgument("weak_convergence_check: need >= 2 entries");
    if (phis.size() != fs.size())
        throw InvalidArgument("weak_convergence_check: phi/f sequence length mismatch");
    WeakConvergenceResult res;
    for (size_t j = 0; j < phis.size(); ++j)
        res.integrals.push_back(
            measure_functionals(phis[j], fs[j], hs, domain_L, y_radius, boxes, quad));
    res.reference = measure_functionals(phi_ref, f_ref, hs, domain_L, y_radius, boxes, quad);
    for (size_t t = 0; t < hs.size(); ++t)
        res.max_discrepancy =
            std::max(res.max_discrepancy, std::abs(res.integrals.back()[t] - res.reference[t]));
    return res;
}

}  // namespace maent
