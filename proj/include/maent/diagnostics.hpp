// Numerical surrogates for the qualitative claims: properness of the
// solution, the two-sided gradient-image density bounds on sublevel sets,
// strict convexity at a probe scale, a Holder exponent fit for the selected
// gradient, and the equivariance audit.
#pragma once

#include "maent/group.hpp"
#include "maent/measure.hpp"

namespace maent {

// ---------------------------------------------------------------------------
// Properness
// ---------------------------------------------------------------------------

enum class PropernessVerdict { ProperTrend, Flat };

struct PropernessReport {
    std::vector<double> radii;
    std::vector<double> min_on_sphere;
    PropernessVerdict verdict = PropernessVerdict::Flat;
};

inline const char* to_string(PropernessVerdict v) {
    return v == PropernessVerdict::ProperTrend ? "PROPER-TREND" : "FLAT";
}

/// PROPER-TREND when the sphere minima strictly increase with increasing
/// increments; a range below `flat_floor` reads as FLAT regardless.
inline PropernessReport properness_check(const PLConvexFunction& phi,
                                         const std::vector<double>& radii,
                                         double flat_floor = 1e-6, int angular_samples = 256) {
    if (radii.size() < 3) throw InvalidArgument("properness_check: need >= 3 radii");
    PropernessReport rep;
    rep.radii = radii;
    const int n = phi.dimension();
    for (double r : radii) {
        double mn = std::numeric_limits<double>::infinity();
        for (const Vec& u : sphere_samples(n, angular_samples)) {
            Vec x(n);
            for (int j = 0; j < n; ++j) x[j] = r * u[j];
            mn = std::min(mn, phi.value(x));
        }
        rep.min_on_sphere.push_back(mn);
    }
    bool proper = rep.min_on_sphere.back() - rep.min_on_sphere.front() > flat_floor;
    double prev_inc = -std::numeric_limits<double>::infinity();
    for (size_t j = 1; j < rep.min_on_sphere.size(); ++j) {
        const double inc = rep.min_on_sphere[j] - rep.min_on_sphere[j - 1];
        if (inc <= 0.0 || inc < prev_inc - 1e-12) proper = false;
        prev_inc = inc;
    }
    rep.verdict = proper ? PropernessVerdict::ProperTrend : PropernessVerdict::Flat;
    return rep;
}

// ---------------------------------------------------------------------------
// Gradient-image density bounds on a sublevel set
// ---------------------------------------------------------------------------

struct Eq4Bounds {
    double c = 0.0;
    double lambda1 = 0.0;  // min over sampled balls of |grad phi(B)| / |B|
    double lambda2 = 0.0;  // max
    int balls = 0;
};

inline Eq4Bounds eq4_bounds(const PLConvexFunction& phi, double c, int sample_balls,
                            std::mt19937_64& rng, double domain_radius = 0.0,
                            const MeasureQuad& quad = {}) {
    const int n = phi.dimension();
    if (domain_radius <= 0.0) domain_radius = 2.0;
    // sublevel geometry from a probe lattice
    const auto probes = PLConvexFunction::ball_lattice(n, domain_radius, 48);
    double r_c = 0.0;
    std::vector<size_t> inside;
    for (size_t p = 0; p < probes.size(); p += n) {
        if (phi.value(probes.data() + p) <= c) {
            inside.push_back(p);
            r_c = std::max(r_c, norm(probes.data() + p, n));
        }
    }
    if (inside.empty()) throw EmptySublevel("eq4_bounds: sublevel set {phi <= c} is empty");

    const double rb = std::max(0.2 * std::max(r_c, 0.2), 0.02);
    const double unit_ball = unit_ball_volume(n) * std::pow(rb, n);
    const double y_dom = phi.max_slope_norm() + 1e-9;

    // a candidate ball stays in the sublevel set iff its boundary does
    // (convexity: the maximum over the ball sits on the boundary)
    const auto boundary_dirs = sphere_samples(n, 24);
    auto ball_inside = [&](const Vec& center) {
        for (const Vec& u : boundary_dirs) {
            Vec x(n);
            for (int j = 0; j < n; ++j) x[j] = center[j] + rb * u[j];
            if (phi.value(x) > c) return false;
        }
        return true;
    };

    Eq4Bounds out;
    out.c = c;
    out.lambda1 = std::numeric_limits<double>::infinity();
    out.lambda2 = 0.0;
    const auto one = DensitySpec::constant(n, 1.0);
    int used = 0;
    for (int t = 0; t < 16 * sample_balls && used < sample_balls; ++t) {
        const size_t p = inside[static_cast<size_t>(uniform01(rng) * inside.size()) %
                                inside.size()];
        Vec center(probes.begin() + p, probes.begin() + p + n);
        if (!ball_inside(center)) continue;
        const auto est = ma_measure(TestSet::ball(center, rb), phi, one, y_dom, quad);
        const double ratio = est.value / unit_ball;
        out.lambda1 = std::min(out.lambda1, ratio);
        out.lambda2 = std::max(out.lambda2, ratio);
        ++used;
    }
    if (used == 0) throw EmptySublevel("eq4_bounds: no sampled ball fits in the sublevel set");
    out.balls = used;
    return out;
}

// ---------------------------------------------------------------------------
// Strict convexity probe
// ---------------------------------------------------------------------------

struct ConvexityProbe {
    int segments = 0;
    double min_midpoint_gap = 0.0;
    double segment_length = 0.0;
};

/// Minimum of (phi(x)+phi(y))/2 - phi((x+y)/2) over random segments of the
/// stated length; PL functions are affine below the cell scale, so the gap is
/// meaningful only at the probe scale and above.
inline ConvexityProbe strict_convexity_probe(const PLConvexFunction& phi, int segments,
                                             std::mt19937_64& rng, double domain_radius = 1.0,
                                             double min_length = 0.1) {
    if (segments < 1) throw InvalidArgument("strict_convexity_probe: need >= 1 segment");
    const int n = phi.dimension();
    ConvexityProbe out;
    out.segments = segments;
    out.segment_length = min_length;
    out.min_midpoint_gap = std::numeric_limits<double>::infinity();
    for (int t = 0; t < segments; ++t) {
        Vec x(n), d(n);
        for (int j = 0; j < n; ++j) x[j] = uniform_in(rng, -domain_radius, domain_radius);
        const Vec u = random_unit_vector(rng, n);
        const double len = min_length * (1.0 + uniform01(rng));
        Vec y(n), mid(n);
        for (int j = 0; j < n; ++j) {
            y[j] = x[j] + len * u[j];
            mid[j] = x[j] + 0.5 * len * u[j];
        }
        if (norm(x) > domain_radius || norm(y) > domain_radius) { --t; continue; }
        const double gap = 0.5 * (phi.value(x) + phi.value(y)) - phi.value(mid);
        out.min_midpoint_gap = std::min(out.min_midpoint_gap, gap);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Holder exponent of the selected gradient
// ---------------------------------------------------------------------------

struct HolderFit {
    double beta = 0.0;          // clipped to (0, 1]
    double fit_residual = 0.0;  // rms residual of the log-log fit
    double r_squared = 0.0;
    int pairs_used = 0;
    bool low_confidence = false;
};

/// Least-squares slope of log ||grad(x)-grad(y)|| against log |x-y| over
/// random pairs, restricted to separations above one cell diameter (the PL
/// plateau scale). Constant gradients raise InsufficientVariation.
inline HolderFit holder_gradient_fit(const PLConvexFunction& phi, double domain_radius,
                                     int pairs, std::mt19937_64& rng) {
    if (pairs < 100) throw InvalidArgument("holder_gradient_fit: need >= 100 pairs");
    const int n = phi.dimension();

    // cell scale from the count of distinct selected gradients on a probe set
    std::vector<Vec> probe_grads;
    const auto probes = PLConvexFunction::ball_lattice(n, domain_radius, 24);
    for (size_t p = 0; p < probes.size(); p += n) {
        const Vec g = phi.gradient_select(Vec(probes.begin() + p, probes.begin() + p + n));
        bool dup = false;
        for (const Vec& q : probe_grads)
            if (dist(g, q) <= 1e-12) { dup = true; break; }
        if (!dup) probe_grads.push_back(g);
    }
    if (probe_grads.size() < 2)
        throw InsufficientVariation("holder_gradient_fit: selected gradient is constant");
    const double cell_diam =
        2.0 * domain_radius * std::sqrt(M_PI / static_cast<double>(probe_grads.size()));

    std::vector<double> ls, lg;
    for (int t = 0; t < 20 * pairs && static_cast<int>(ls.size()) < pairs; ++t) {
        Vec x(n), y(n);
        for (int j = 0; j < n; ++j) {
            x[j] = uniform_in(rng, -domain_radius, domain_radius);
            y[j] = uniform_in(rng, -domain_radius, domain_radius);
        }
        if (norm(x) > domain_radius || norm(y) > domain_radius) continue;
        const double sep = dist(x, y);
        if (sep < cell_diam) continue;
        const Vec gx = phi.gradient_select(x), gy = phi.gradient_select(y);
        const double dg = dist(gx, gy);
        if (dg <= 1e-14) continue;
        ls.push_back(std::log(sep));
        lg.push_back(std::log(dg));
    }
    if (ls.size() < 16)
        throw InsufficientVariation("holder_gradient_fit: not enough varying pairs");

    const size_t m = ls.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sx += ls[i];
        sy += lg[i];
        sxx += ls[i] * ls[i];
        sxy += ls[i] * lg[i];
    }
    const double denom = m * sxx - sx * sx;
    HolderFit fit;
    fit.pairs_used = static_cast<int>(m);
    const double slope = (denom > 1e-12) ? (m * sxy - sx * sy) / denom : 0.0;
    const double icept = (sy - slope * sx) / m;
    double rss = 0.0, tss = 0.0;
    const double mean_y = sy / m;
    for (size_t i = 0; i < m; ++i) {
        const double e = lg[i] - slope * ls[i] - icept;
        rss += e * e;
        tss += (lg[i] - mean_y) * (lg[i] - mean_y);
    }
    fit.fit_residual = std::sqrt(rss / m);
    fit.r_squared = (tss > 1e-12) ? 1.0 - rss / tss : 0.0;
    fit.beta = std::min(std::max(slope, 0.01), 1.0);
    fit.low_confidence = (slope < 0.2) || (fit.r_squared < 0.5);
    return fit;
}

// ---------------------------------------------------------------------------
// Equivariance audit
// ---------------------------------------------------------------------------

struct EquivarianceReport {
    double value_violation = 0.0;     // max |phi(gx) - phi(x)|
    double gradient_violation = 0.0;  // max ||grad(gx) - g grad(x)||
};

inline EquivarianceReport equivariance_check(const PLConvexFunction& phi,
                                             const OrthogonalGroupSpec& group,
                                             const std::vector<double>& grid_nodes) {
    if (!group.finite()) throw InvalidArgument("equivariance_check: explicit-finite group only");
    const int n = phi.dimension();
    EquivarianceReport rep;
    Vec x(n), gx(n), ggrad(n);
    for (size_t p = 0; p < grid_nodes.size(); p += n) {
        for (int j = 0; j < n; ++j) x[j] = grid_nodes[p + j];
        const double vx = phi.value(x.data());
        const Vec grad_x = phi.gradient_select(x);
        for (const Mat& g : group.elements) {
            g.apply(x.data(), gx.data());
            rep.value_violation =
                std::max(rep.value_violation, std::abs(phi.value(gx.data()) - vx));
            const Vec grad_gx = phi.gradient_select(gx);
            g.apply(grad_x.data(), ggrad.data());
            rep.gradient_violation =
                std::max(rep.gradient_violation, dist(grad_gx.data(), ggrad.data(), n));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

struct DiagnosticsReport {
    PropernessReport properness;
    Eq4Bounds eq4;
    ConvexityProbe convexity;
    HolderFit holder;
    bool holder_valid = false;
    EquivarianceReport equivariance;
    bool equivariance_done = false;
};

}  // namespace maent
