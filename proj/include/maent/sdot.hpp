// Semi-discrete optimal transport for the inner second-boundary-value
// problems: orbit-complete target sampling with Voronoi masses, cell masses
// under a max-affine potential, and the symmetry-reduced concave dual ascent
// that matches cell masses to target masses.
//
// With pieces <y_i,x> + w_i (w = -intercept) the dual
//     D(w) = sum_i nu_i w_i - int_{B_k} max_i(<y_i,x> + w_i) g_k dx
// is concave with dD/dw_i = nu_i - m_i(w), so damped ascent with a monotone
// line search drives every cell mass m_i to its target nu_i. One unknown is
// shared per group orbit, which makes the potential K-invariant exactly.
#pragma once

#include "maent/ballgrid.hpp"
#include "maent/density.hpp"
#include "maent/group.hpp"
#include "maent/plconvex.hpp"

namespace maent {

struct Targets {
    int dim = 0;
    std::vector<double> points;  // count*dim
    std::vector<double> masses;  // count
    std::vector<std::vector<int>> orbits;
    int near_zero_cells = 0;  // cells whose mass is ~0 relative to the total

    int count() const { return static_cast<int>(masses.size()); }
    const double* point(int i) const { return points.data() + static_cast<size_t>(i) * dim; }

    double total_mass() const {
        double s = 0.0;
        for (double m : masses) s += m;
        return s;
    }

    void rescale_total(double target_total) {
        const double s = total_mass();
        if (s <= 0.0) throw DegenerateTargets("targets: zero total mass");
        const double f = target_total / s;
        for (double& m : masses) m *= f;
    }
};

struct OTProblemInstance {
    PerturbedDensity source;  // g_k on B_k
    double source_radius;     // k
    Targets targets;          // atoms in B_{R_k}
    double target_radius;     // R_k
};

struct SolverTrace {
    int iterations = 0;
    double final_mass_residual = 0.0;
    std::vector<double> dual_objective;
    bool converged = false;
    std::string note;
};

// ---------------------------------------------------------------------------
// Orbit completeness
// ---------------------------------------------------------------------------

/// Every group image of every target must be a target carrying the same mass.
inline bool check_orbit_complete(const Targets& t, const OrthogonalGroupSpec& group,
                                 double pos_tol = 1e-8, double mass_rel_tol = 1e-8) {
    if (!group.finite()) return true;
    const int n = t.dim;
    Vec gx(n);
    for (int i = 0; i < t.count(); ++i) {
        for (const Mat& g : group.elements) {
            g.apply(t.point(i), gx.data());
            bool found = false;
            for (int j = 0; j < t.count(); ++j) {
                if (dist(gx.data(), t.point(j), n) <= pos_tol) {
                    const double scale = std::max(std::abs(t.masses[i]), 1e-300);
                    if (std::abs(t.masses[i] - t.masses[j]) <= mass_rel_tol * scale) found = true;
                    break;
                }
            }
            if (!found) return false;
        }
    }
    return true;
}

inline void validate_instance(const OTProblemInstance& inst, double mass_rel_tol = 1e-8) {
    const double expect = ball_mass(inst.source, inst.source_radius);
    const double got = inst.targets.total_mass();
    if (std::abs(got - expect) > mass_rel_tol * std::max(expect, 1e-300))
        throw InvalidArgument("OT instance: target masses do not sum to the source mass");
    for (int i = 0; i < inst.targets.count(); ++i)
        if (norm(inst.targets.point(i), inst.targets.dim) > inst.target_radius * (1.0 + 1e-9))
            throw InvalidArgument("OT instance: target outside B_{R_k}");
}

// ---------------------------------------------------------------------------
// Target sampling
// ---------------------------------------------------------------------------

struct TargetLayoutParams {
    double focus_radius = -1.0;   // dense coverage up to here; <0 means uniform
    double dense_fraction = 0.6;  // share of the budget spent inside the focus
};

namespace detail {

struct RingSpec {
    double radius;
    int desired_points;
    double offset_seed;
};

// Radially graded ring layout: locally isotropic spacing inside the focus
// disc, geometric ring growth outside. Points per ring are snapped to orbit
// multiples through the base-angle construction.
inline std::vector<RingSpec> ring_layout(double R, int N, const TargetLayoutParams& p) {
    std::vector<RingSpec> rings;
    double rho = (p.focus_radius > 0.0) ? std::min(p.focus_radius, R) : R;
    const bool uniform = rho >= 0.95 * R;
    if (uniform) rho = R;
    const double beta = uniform ? 1.0 : p.dense_fraction;
    const double s0 = rho * std::sqrt(M_PI / std::max(beta * N, 4.0));

    int j = 0;
    for (double r = 0.5 * s0; r < rho; r += s0, ++j) {
        const int m = std::max(1, static_cast<int>(std::lround(2.0 * M_PI * r / s0)));
        rings.push_back({r, m, std::fmod(0.5 + j * 0.6180339887498949, 1.0)});
    }
    if (rings.empty())
        rings.push_back({0.5 * rho, std::max(1, N), 0.5});

    if (!uniform) {
        const double budget = std::max((1.0 - beta) * N, 8.0);
        double gamma = std::sqrt(2.0 * M_PI * std::log(std::max(R / rho, 1.01)) / budget);
        gamma = std::min(std::max(gamma, 0.05), 0.9);
        const int per_ring = std::max(1, static_cast<int>(std::lround(2.0 * M_PI / gamma)));
        for (double r = rho * (1.0 + gamma); r < R * (1.0 - 0.25 * gamma); r *= 1.0 + gamma, ++j)
            rings.push_back({r, per_ring, std::fmod(0.5 + j * 0.6180339887498949, 1.0)});
        // one ring near the boundary so the outermost annulus has an owner
        rings.push_back({R * (1.0 - 0.25 * gamma),
                         per_ring,
                         std::fmod(0.5 + (j + 1) * 0.6180339887498949, 1.0)});
    }
    return rings;
}

inline void append_orbit(Targets& t, const GroupOrbit& orb, double dedup_tol) {
    const int n = t.dim;
    // skip the whole orbit if its representative already exists
    for (int i = 0; i < t.count(); ++i)
        if (dist(t.points.data() + static_cast<size_t>(i) * n, orb.points.front().data(), n) <=
            dedup_tol)
            return;
    std::vector<int> ids;
    for (const Vec& p : orb.points) {
        ids.push_back(t.count());
        t.points.insert(t.points.end(), p.begin(), p.end());
        t.masses.push_back(0.0);
    }
    t.orbits.push_back(std::move(ids));
}

}  // namespace detail

/// Voronoi masses of a target point set inside B_R: nu_i = int over the cell
/// of f. Uses a layout-adapted polar product rule (radial 2-point Gauss per
/// sub-annulus between consecutive target radii) so the total is
/// quadrature-exact for radial f regardless of how ragged the cells are.
inline std::vector<double> voronoi_masses(const Targets& t, const PerturbedDensity& f, double R,
                                          int refine = 1) {
    const int n = t.dim;
    const int m = t.count();
    std::vector<double> nu(m, 0.0);

    auto assign = [&](const double* x) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double d = dist(x, t.point(i), n);
            if (d < bd - 1e-15) { bd = d; best = i; }
        }
        return best;
    };

    if (n == 2) {
        // annulus edges: midpoints between consecutive distinct target radii
        std::vector<double> radii;
        for (int i = 0; i < m; ++i) radii.push_back(norm(t.point(i), 2));
        std::sort(radii.begin(), radii.end());
        std::vector<double> edges = {0.0};
        for (size_t i = 0; i + 1 < radii.size(); ++i) {
            const double mid = 0.5 * (radii[i] + radii[i + 1]);
            if (mid > edges.back() + 1e-12 && mid < R) edges.push_back(mid);
        }
        for (double knot : f.breakpoints())
            if (knot > 1e-12 && knot < R) edges.push_back(knot);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges.push_back(R);

        int max_ring = 64;
        for (const auto& orb : t.orbits) max_ring = std::max(max_ring, 2 * (int)orb.size());
        const int nt = 4 * max_ring * refine;
        const double ht = 2.0 * M_PI / nt;
        const int nsub = 4 * refine;
        const double gl = 0.5773502691896258;  // 2-point Gauss on [-1,1]

        double x[2];
        for (size_t e = 0; e + 1 < edges.size(); ++e) {
            const double a = edges[e], b = edges[e + 1];
            const double hs = (b - a) / nsub;
            for (int s = 0; s < nsub; ++s) {
                const double c0 = a + (s + 0.5) * hs;
                for (int gp = 0; gp < 2; ++gp) {
                    const double r = c0 + 0.5 * hs * (gp == 0 ? -gl : gl);
                    const double wr = 0.5 * hs * r;  // GL weight 1 each, jacobian r
                    const double fr = f.eval_radial(r);
                    for (int jt = 0; jt < nt; ++jt) {
                        const double th = (jt + 0.5) * ht;
                        x[0] = r * std::cos(th);
                        x[1] = r * std::sin(th);
                        nu[assign(x)] += fr * wr * ht;
                    }
                }
            }
        }
        return nu;
    }

    // generic fallback: dense ball grid
    const BallGrid g = build_ball_grid(n, R, 128 * refine);
    for (size_t p = 0; p < g.count; ++p) {
        const double* x = g.nodes.data() + p * n;
        nu[assign(x)] += f.eval(x) * g.weights[p];
    }
    return nu;
}

/// Orbit-complete target sampling of f_k over B_{R_k}. N is a budget hint;
/// orbit completion can exceed it by less than one orbit. If
/// rescale_to >= 0 the masses are rescaled to that total (the source-side
/// mass) after the quadrature check against ball_mass(f_k, R_k).
inline Targets sample_targets(const PerturbedDensity& f_k, double R_k, int N,
                              const OrthogonalGroupSpec& group,
                              const TargetLayoutParams& params = {}, double rescale_to = -1.0) {
    const int n = f_k.dimension();
    if (N < 1) throw InvalidArgument("sample_targets: N must be positive");
    Targets t;
    t.dim = n;

    const double dedup = 1e-10 * std::max(R_k, 1.0);

    if (n == 2) {
        const int orb_m = rotation_order_2d(group);
        for (const auto& ring : detail::ring_layout(R_k, N, params)) {
            const int q = std::max(1, static_cast<int>(std::lround(
                                          static_cast<double>(ring.desired_points) / orb_m)));
            const double sector = 2.0 * M_PI / orb_m;
            for (int tq = 0; tq < q; ++tq) {
                const double ang = (ring.offset_seed + tq) * sector / q;
                const Vec base{ring.radius * std::cos(ang), ring.radius * std::sin(ang)};
                detail::append_orbit(t, orbit(base, group), dedup);
            }
        }
    } else if (n == 1) {
        const int half = std::max(1, N / 2);
        const double h = R_k / half;
        for (int j = 0; j < half; ++j)
            detail::append_orbit(t, orbit(Vec{(j + 0.5) * h}, group), dedup);
        // ensure both signs are present even without -1 in the group
        Targets mirrored = t;
        for (int i = 0; i < mirrored.count(); ++i) {
            const Vec p{-t.points[i]};
            detail::append_orbit(t, GroupOrbit{p, {p}}, dedup);
        }
    } else {
        // shells with low-discrepancy directions, orbit-completed
        const int shells = std::max(2, static_cast<int>(std::cbrt(static_cast<double>(N))));
        const int per_shell = std::max(1, N / (shells * std::max(group.order(), 1)));
        for (int s = 0; s < shells; ++s) {
            const double r = (s + 0.5) * R_k / shells;
            for (const Vec& u : sphere_samples(n, per_shell)) {
                Vec base(n);
                for (int j = 0; j < n; ++j) base[j] = r * u[j];
                detail::append_orbit(t, orbit(base, group), dedup);
            }
        }
    }

    // distinctness: need at least a simplex worth of points
    if (t.count() < n + 1)
        throw DegenerateTargets("sample_targets: fewer than n+1 distinct targets");

    std::vector<double> nu = voronoi_masses(t, f_k, R_k);
    double total = 0.0;
    for (double v : nu) total += v;
    const double expect = ball_mass(f_k, R_k);
    if (std::abs(total - expect) > 1e-6 * expect) {
        nu = voronoi_masses(t, f_k, R_k, 4);  // one refinement pass
        total = 0.0;
        for (double v : nu) total += v;
        if (std::abs(total - expect) > 1e-6 * expect)
            throw QuadratureFailure("sample_targets: cell-mass quadrature did not reach 1e-6");
    }
    t.masses = std::move(nu);
    t.near_zero_cells = 0;
    for (double v : t.masses)
        if (v < 1e-12 * total) ++t.near_zero_cells;
    t.rescale_total(rescale_to >= 0.0 ? rescale_to : expect);
    return t;
}

// ---------------------------------------------------------------------------
// Cell masses and the dual ascent
// ---------------------------------------------------------------------------

/// m_i = sum over grid nodes x in B_k with i = argmax_j <y_j,x> - c_j of
/// g_k(x) * weight(x); ties go to the lowest index.
inline std::vector<double> cell_masses(const OTProblemInstance& inst,
                                       const std::vector<double>& intercepts,
                                       const BallGrid& grid) {
    const int m = inst.targets.count();
    if (static_cast<int>(intercepts.size()) != m)
        throw InvalidArgument("cell_masses: intercept count mismatch");
    std::vector<double> masses(m, 0.0);
    const int n = inst.targets.dim;
    const double* pts = inst.targets.points.data();
    for (size_t p = 0; p < grid.count; ++p) {
        const double* x = grid.nodes.data() + p * n;
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        if (n == 2) {
            const double x0 = x[0], x1 = x[1];
            for (int i = 0; i < m; ++i) {
                const double v = pts[2 * i] * x0 + pts[2 * i + 1] * x1 - intercepts[i];
                if (v > best) { best = v; arg = i; }
            }
        } else {
            for (int i = 0; i < m; ++i) {
                const double v = dot(pts + static_cast<size_t>(i) * n, x, n) - intercepts[i];
                if (v > best) { best = v; arg = i; }
            }
        }
        masses[arg] += inst.source.eval(x) * grid.weights[p];
    }
    return masses;
}

namespace detail {

// Radial profile of the target layout transferred to the source ball: ring
// radii merged in y-space, their cumulative-mass boundary radii in x-space,
// and the local target spacing per annulus (used to scale the antialiasing
// band). Everything here depends on the instance only, never on the weights.
struct RingProfile {
    std::vector<double> edges;    // 0 = e_0 < ... < e_m = k
    std::vector<double> spacing;  // per annulus, y-space neighbor scale
    std::vector<double> ring_r;   // ring radii in y-space, ascending
    std::vector<int> ring_count;  // total points on each ring
    int max_ring_points = 1;

    double lookup_spacing(double r) const {
        const auto it = std::upper_bound(edges.begin(), edges.end(), r);
        size_t j = static_cast<size_t>(it - edges.begin());
        j = std::min(std::max<size_t>(j, 1), spacing.size()) - 1;
        return spacing[j];
    }

    int ring_index(double rho) const {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < ring_r.size(); ++j) {
            const double d = std::abs(ring_r[j] - rho);
            if (d < bd) { bd = d; best = static_cast<int>(j); }
        }
        return best;
    }
};

inline RingProfile build_ring_profile(const OTProblemInstance& inst) {
    const double k = inst.source_radius;
    struct Ring {
        double r;
        double mass;
        int points;
    };
    std::vector<Ring> rings;
    const double merge_tol = 1e-9 * (inst.target_radius + 1.0);
    for (int i = 0; i < inst.targets.count(); ++i) {
        const double r = norm(inst.targets.point(i), inst.targets.dim);
        bool found = false;
        for (Ring& ring : rings)
            if (std::abs(ring.r - r) <= merge_tol) {
                ring.mass += inst.targets.masses[i];
                ring.points += 1;
                found = true;
                break;
            }
        if (!found) rings.push_back({r, inst.targets.masses[i], 1});
    }
    std::sort(rings.begin(), rings.end(), [](const Ring& a, const Ring& b) { return a.r < b.r; });

    RingProfile prof;
    prof.edges.push_back(0.0);
    const double total = inst.targets.total_mass();
    const double source_total = ball_mass(inst.source, k);
    double cum = 0.0;
    for (size_t j = 0; j + 1 < rings.size(); ++j) {
        cum += rings[j].mass;
        double lo = prof.edges.back(), hi = k;
        const double target = cum * source_total / total;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (ball_mass(inst.source, mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        const double b = 0.5 * (lo + hi);
        if (b > prof.edges.back() * (1.0 + 1e-9) + 1e-12) prof.edges.push_back(b);
        else continue;
        // spacing of the ring that owns the annulus just closed
        const Ring& r = rings[j];
        double s = (r.points > 1) ? 2.0 * M_PI * r.r / r.points : r.r + 1e-12;
        if (j > 0) s = std::min(s, r.r - rings[j - 1].r);
        if (j + 1 < rings.size()) s = std::min(s, rings[j + 1].r - r.r);
        prof.spacing.push_back(std::max(s, 1e-12));
    }
    prof.edges.push_back(k);
    {
        const Ring& r = rings.back();
        double s = (r.points > 1) ? 2.0 * M_PI * r.r / r.points : r.r + 1e-12;
        if (rings.size() > 1) s = std::min(s, r.r - rings[rings.size() - 2].r);
        prof.spacing.push_back(std::max(s, 1e-12));
    }
    for (const Ring& r : rings) {
        prof.max_ring_points = std::max(prof.max_ring_points, r.points);
        prof.ring_r.push_back(r.r);
        prof.ring_count.push_back(r.points);
    }
    return prof;
}

// Analytic per-orbit curvature scale of the dual, d m_o / d w_o, from the
// power-diagram facet geometry: facet length over slope gap, summed over the
// angular (same ring) and radial (neighbor ring) facets of one cell.
template <class Source>
inline std::vector<double> orbit_curvature_scales(const Source& source, const RingProfile& prof,
                                                  const Targets& targets) {
    std::vector<double> H(targets.orbits.size(), 1.0);
    for (size_t o = 0; o < targets.orbits.size(); ++o) {
        const int rep = targets.orbits[o].front();
        const double rho = norm(targets.point(rep), targets.dim);
        const int j = prof.ring_index(rho);
        const double blo = prof.edges[std::min<size_t>(j, prof.edges.size() - 1)];
        const double bhi = prof.edges[std::min<size_t>(j + 1, prof.edges.size() - 1)];
        const double bmid = 0.5 * (blo + bhi);
        const double g = source.eval_radial(bmid);
        const int cnt = prof.ring_count[j];
        const double arc_y = (cnt > 1) ? 2.0 * M_PI * std::max(rho, 1e-12) / cnt : 0.0;
        const double arc_x = 2.0 * M_PI * std::max(bmid, 1e-12) / std::max(cnt, 1);
        double t = 0.0;
        if (arc_y > 0.0) t += 2.0 * std::max(bhi - blo, 1e-12) / arc_y;
        if (j > 0) t += arc_x / std::max(rho - prof.ring_r[j - 1], 1e-12);
        if (j + 1 < static_cast<int>(prof.ring_r.size()))
            t += arc_x / std::max(prof.ring_r[j + 1] - rho, 1e-12);
        H[o] = std::max(g * t * targets.orbits[o].size(), 1e-12);
    }
    return H;
}

// One sweep of smoothed cell masses plus the matching envelope integral.
// The hard max over pieces is replaced by log-sum-exp at a per-node
// temperature `aa[p]` (node extent times local target spacing), so the node
// mass splits across every near-tied piece by softmax. That keeps the
// envelope smooth and convex in w with dE/dw_i equal to the softmax weight
// exactly, so dD/dw_i = nu_i - m_i holds for the smoothed pair; a hard
// argmax gives node-quantized staircase masses plus mass teleports at
// triple-tie corners, both of which defeat the ascent right at the optimum.
inline void masses_and_envelope(const OTProblemInstance& inst, const std::vector<double>& w,
                                const BallGrid& grid, const std::vector<double>& aa,
                                std::vector<double>& masses, double& envelope) {
    const int m = inst.targets.count();
    const int n = inst.targets.dim;
    masses.assign(m, 0.0);
    envelope = 0.0;
    const double* pts = inst.targets.points.data();
    std::vector<double> vals(m);
    for (size_t p = 0; p < grid.count; ++p) {
        const double* x = grid.nodes.data() + p * n;
        double v1 = -std::numeric_limits<double>::infinity();
        if (n == 2) {
            const double x0 = x[0], x1 = x[1];
            for (int i = 0; i < m; ++i) {
                const double v = pts[2 * i] * x0 + pts[2 * i + 1] * x1 + w[i];
                vals[i] = v;
                if (v > v1) v1 = v;
            }
        } else {
            for (int i = 0; i < m; ++i) {
                const double v = dot(pts + static_cast<size_t>(i) * n, x, n) + w[i];
                vals[i] = v;
                if (v > v1) v1 = v;
            }
        }
        const double gw = inst.source.eval(x) * grid.weights[p];
        const double b = (m > 1) ? aa[p] : 0.0;
        if (b <= 0.0) {
            for (int i = 0; i < m; ++i)
                if (vals[i] == v1) {
                    masses[i] += gw;
                    break;
                }
            envelope += v1 * gw;
            continue;
        }
        const double cutoff = v1 - 36.0 * b;
        double zsum = 0.0;
        for (int i = 0; i < m; ++i)
            if (vals[i] > cutoff) zsum += std::exp((vals[i] - v1) / b);
        const double inv = gw / zsum;
        for (int i = 0; i < m; ++i)
            if (vals[i] > cutoff) masses[i] += std::exp((vals[i] - v1) / b) * inv;
        envelope += (v1 + b * std::log(zsum)) * gw;
    }
}

inline double mean_nn_spacing(const Targets& t) {
    const int m = t.count();
    if (m < 2) return 1.0;
    double acc = 0.0;
    const int step = std::max(1, m / 64);
    int cnt = 0;
    for (int i = 0; i < m; i += step) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            best = std::min(best, dist(t.point(i), t.point(j), t.dim));
        }
        acc += best;
        ++cnt;
    }
    return acc / std::max(cnt, 1);
}

}  // namespace detail

/// Solver grid adapted to the instance. For radial data the cell stack below
/// cumulative target mass M ends at the source radius G_k^{-1}(M), so radial
/// edges are placed at those transfer radii and refined in between; that
/// resolves every cell with the same relative resolution even when the target
/// layout is strongly graded. The angular count tracks the densest ring.
inline BallGrid build_adapted_source_grid(const OTProblemInstance& inst, int res,
                                          int angular_align = 1) {
    const int n = inst.targets.dim;
    if (n != 2) return build_ball_grid(n, inst.source_radius, res, angular_align);
    const double k = inst.source_radius;
    const detail::RingProfile prof = detail::build_ring_profile(inst);

    const int nt = std::max(angular_align, round_up_multiple(
                                               std::max(res, 8 * prof.max_ring_points),
                                               angular_align));
    const int qr = std::max(4, res / 32);

    BallGrid g;
    g.dim = 2;
    g.radius = k;
    const double ht = 2.0 * M_PI / nt;
    for (size_t e = 0; e + 1 < prof.edges.size(); ++e) {
        const double hr = (prof.edges[e + 1] - prof.edges[e]) / qr;
        if (hr <= 0.0) continue;
        for (int s = 0; s < qr; ++s) {
            const double rlo = prof.edges[e] + s * hr, rhi = rlo + hr;
            const double rc = 0.5 * (rlo + rhi);
            const double w = ht * 0.5 * (rhi * rhi - rlo * rlo);
            const double bd = std::sqrt(hr * std::max(rc * ht, 1e-300));
            for (int j = 0; j < nt; ++j) {
                const double t = (j + 0.5) * ht;
                g.nodes.push_back(rc * std::cos(t));
                g.nodes.push_back(rc * std::sin(t));
                g.weights.push_back(w);
                g.band.push_back(bd);
            }
        }
    }
    g.count = g.weights.size();
    return g;
}

struct SolveWeightsParams {
    double tol = 1e-3;       // max_i |m_i - nu_i| / nu_i
    int max_iter = 2000;
    int grid_res = 256;
    std::vector<double> init_intercepts;  // optional warm start
};

/// Dual ascent with one intercept unknown per orbit. Returns the max-affine
/// potential (K-invariant by construction) and the monotone trace.
inline std::pair<PLConvexFunction, SolverTrace> solve_weights(
    const OTProblemInstance& inst, const OrthogonalGroupSpec& group,
    const SolveWeightsParams& params = {}) {
    const int m = inst.targets.count();
    const int n = inst.targets.dim;
    if (m == 0) throw InvalidArgument("solve_weights: no targets");
    const int n_orbits = static_cast<int>(inst.targets.orbits.size());
    if (n_orbits == 0) throw InvalidArgument("solve_weights: targets carry no orbit structure");

    std::vector<int> orbit_of(m, -1);
    for (int o = 0; o < n_orbits; ++o)
        for (int i : inst.targets.orbits[o]) orbit_of[i] = o;
    for (int i = 0; i < m; ++i)
        if (orbit_of[i] < 0) throw InvalidArgument("solve_weights: orphan target");

    const int align = rotation_order_2d(group);
    const BallGrid grid = build_adapted_source_grid(inst, params.grid_res, align);
    const detail::RingProfile prof = detail::build_ring_profile(inst);

    // per-node softmax temperature in value units: node extent times the
    // local target spacing; fixed during the solve so the smoothed dual is
    // a single smooth concave function of w
    std::vector<double> aa(grid.count);
    for (size_t p = 0; p < grid.count; ++p) {
        const double r = norm(grid.nodes.data() + p * n, n);
        aa[p] = 0.25 * grid.band[p] * prof.lookup_spacing(r);
    }

    // rescale the target masses to the grid's own source mass so that the
    // residual can reach zero on this grid
    std::vector<double> nu(inst.targets.masses);
    double nu_total = 0.0, grid_mass = 0.0;
    for (double v : nu) nu_total += v;
    for (size_t p = 0; p < grid.count; ++p)
        grid_mass += inst.source.eval(grid.nodes.data() + p * n) * grid.weights[p];
    if (nu_total <= 0.0) throw InvalidArgument("solve_weights: zero target mass");
    for (double& v : nu) v *= grid_mass / nu_total;

    std::vector<double> nu_orbit(n_orbits, 0.0);
    for (int i = 0; i < m; ++i) nu_orbit[orbit_of[i]] += nu[i];

    // unknowns: one weight per orbit (w = -intercept)
    std::vector<double> W(n_orbits, 0.0);
    if (!params.init_intercepts.empty()) {
        if (static_cast<int>(params.init_intercepts.size()) != m)
            throw InvalidArgument("solve_weights: warm-start intercept count mismatch");
        for (int o = 0; o < n_orbits; ++o)
            W[o] = -params.init_intercepts[inst.targets.orbits[o].front()];
    } else {
        for (int o = 0; o < n_orbits; ++o) {
            const double* y = inst.targets.point(inst.targets.orbits[o].front());
            W[o] = -0.5 * norm2(y, n);
        }
    }

    auto expand = [&](const std::vector<double>& Worb, std::vector<double>& w_full) {
        w_full.resize(m);
        for (int i = 0; i < m; ++i) w_full[i] = Worb[orbit_of[i]];
    };

    SolverTrace trace;
    std::vector<double> w_full, masses;
    double envelope = 0.0;

    auto dual_value = [&](const std::vector<double>& Worb, std::vector<double>& out_masses,
                          double& out_env) {
        expand(Worb, w_full);
        detail::masses_and_envelope(inst, w_full, grid, aa, out_masses, out_env);
        double d = -out_env;
        for (int i = 0; i < m; ++i) d += nu[i] * w_full[i];
        return d;
    };

    double D = dual_value(W, masses, envelope);
    trace.dual_objective.push_back(D);

    auto residual = [&]() {
        double r = 0.0;
        for (int i = 0; i < m; ++i)
            r = std::max(r, std::abs(masses[i] - nu[i]) / std::max(nu[i], 1e-300));
        return r;
    };

    // Quasi-Newton ascent built from gradient history (two-loop recursion)
    // with monotone step halving. The initial metric is the analytic
    // facet-geometry curvature per orbit: same-ring angular modes carry
    // roughly (ring gap / arc gap)^2 times the curvature of radial modes,
    // and without this scaling the ascent crawls on that anisotropy.
    const int memory = 10;
    std::vector<std::vector<double>> mem_s, mem_y;
    std::vector<double> mem_rho;
    const std::vector<double> Hscale =
        detail::orbit_curvature_scales(inst.source, prof, inst.targets);
    double h0 = 1.0;
    bool h0_set = false;

    std::vector<double> grad(n_orbits), grad_prev(n_orbits), W_prev(n_orbits);
    std::vector<double> dir(n_orbits), Wtry(n_orbits), masses_try, alpha_buf;
    bool have_prev = false;
    int it = 0;
    for (; it < params.max_iter; ++it) {
        trace.final_mass_residual = residual();
        if (trace.final_mass_residual <= params.tol) {
            trace.converged = true;
            break;
        }
        std::vector<double> morb(n_orbits, 0.0);
        for (int i = 0; i < m; ++i) morb[orbit_of[i]] += masses[i];
        for (int o = 0; o < n_orbits; ++o) grad[o] = nu_orbit[o] - morb[o];

        if (have_prev) {
            std::vector<double> s(n_orbits), y(n_orbits);
            double sy = 0.0, yy = 0.0;
            for (int o = 0; o < n_orbits; ++o) {
                s[o] = W[o] - W_prev[o];
                y[o] = grad_prev[o] - grad[o];  // gradient of -D increases along s
                sy += s[o] * y[o];
                yy += y[o] * y[o];
            }
            if (sy > 1e-300 && yy > 0.0) {
                // scale factor for the diag(1/Hscale) base metric
                double yHy = 0.0;
                for (int o = 0; o < n_orbits; ++o) yHy += y[o] * y[o] / Hscale[o];
                mem_s.push_back(std::move(s));
                mem_y.push_back(std::move(y));
                mem_rho.push_back(1.0 / sy);
                if (static_cast<int>(mem_s.size()) > memory) {
                    mem_s.erase(mem_s.begin());
                    mem_y.erase(mem_y.begin());
                    mem_rho.erase(mem_rho.begin());
                }
                if (yHy > 0.0) {
                    h0 = sy / yHy;
                    h0_set = true;
                }
            }
        }
        W_prev = W;
        grad_prev = grad;

        // two-loop recursion on the ascent direction
        dir = grad;
        const int mm = static_cast<int>(mem_s.size());
        alpha_buf.assign(mm, 0.0);
        for (int j = mm - 1; j >= 0; --j) {
            double sd = 0.0;
            for (int o = 0; o < n_orbits; ++o) sd += mem_s[j][o] * dir[o];
            alpha_buf[j] = mem_rho[j] * sd;
            for (int o = 0; o < n_orbits; ++o) dir[o] -= alpha_buf[j] * mem_y[j][o];
        }
        for (int o = 0; o < n_orbits; ++o) dir[o] *= (h0_set ? h0 : 1.0) / Hscale[o];
        for (int j = 0; j < mm; ++j) {
            double yd = 0.0;
            for (int o = 0; o < n_orbits; ++o) yd += mem_y[j][o] * dir[o];
            const double beta = mem_rho[j] * yd;
            for (int o = 0; o < n_orbits; ++o) dir[o] += (alpha_buf[j] - beta) * mem_s[j][o];
        }
        double gd = 0.0;
        for (int o = 0; o < n_orbits; ++o) gd += grad[o] * dir[o];
        if (gd <= 0.0) {  // not an ascent direction: drop memory, fall back
            mem_s.clear();
            mem_y.clear();
            mem_rho.clear();
            gd = 0.0;
            for (int o = 0; o < n_orbits; ++o) {
                dir[o] = grad[o] / Hscale[o];
                gd += grad[o] * dir[o];
            }
        }

        // Armijo backtracking: flat steps are not accepted, otherwise the
        // iterate can cycle on a level set without ascending
        bool accepted = false;
        double step = 1.0;
        const double floor_slack = 1e-15 * (1.0 + std::abs(D));
        for (int bt = 0; bt < 60; ++bt) {
            for (int o = 0; o < n_orbits; ++o) Wtry[o] = W[o] + step * dir[o];
            double env_try = 0.0;
            const double Dtry = dual_value(Wtry, masses_try, env_try);
            if (Dtry - D >= 1e-4 * step * gd - floor_slack) {
                W.swap(Wtry);
                masses.swap(masses_try);
                D = std::max(Dtry, D);
                envelope = env_try;
                trace.dual_objective.push_back(D);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        have_prev = true;
        if (!accepted) {
            bool empty_cell = false;
            for (int i = 0; i < m; ++i)
                if (masses[i] == 0.0 && nu[i] > 0.0) empty_cell = true;
            if (empty_cell)
                throw EmptyCellStall(
                    "solve_weights: stalled with an empty cell that carries target mass");
            trace.note = "line search stalled";
            break;
        }
    }
    trace.iterations = it;
    trace.final_mass_residual = residual();
    if (!trace.converged && trace.note.empty()) trace.note = "max iterations exceeded";

    PLConvexFunction phi(n);
    expand(W, w_full);
    for (int i = 0; i < m; ++i) phi.add_piece(inst.targets.point(i), -w_full[i], orbit_of[i]);
    return {std::move(phi), std::move(trace)};
}

}  // namespace maent
