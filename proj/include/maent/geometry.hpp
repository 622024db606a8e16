// Orbit convex-hull geometry: inradius of the hull of a group orbit about the
// origin, deterministic sphere sampling, and the irreducibility certificate
// built from both.
//
// The inradius of conv(P) about 0 equals min_{|u|=1} max_i <p_i,u> clamped at
// zero; in n=2 and n=3 we enumerate hull facets exactly, in higher dimension
// we minimize the support function over a deterministic sphere sample (upper
// estimate, reported with the sample count).
#pragma once

#include <algorithm>
#include <array>
#include <map>

#include "maent/group.hpp"

namespace maent {

namespace detail {

// Rank of the linear span of a point set (modified Gram-Schmidt).
inline int span_rank(const std::vector<Vec>& points, int n, double tol = 1e-8) {
    std::vector<Vec> basis;
    for (const Vec& p : points) {
        Vec r = p;
        for (const Vec& b : basis) {
            const double c = dot(r, b);
            for (int i = 0; i < n; ++i) r[i] -= c * b[i];
        }
        const double nr = norm(r);
        if (nr > tol) {
            for (int i = 0; i < n; ++i) r[i] /= nr;
            basis.push_back(std::move(r));
            if (static_cast<int>(basis.size()) == n) break;
        }
    }
    return static_cast<int>(basis.size());
}

// Affine rank: rank of {p_i - p_0}.
inline int affine_rank(const std::vector<Vec>& points, int n, double tol = 1e-8) {
    if (points.empty()) return -1;
    std::vector<Vec> diffs;
    for (size_t i = 1; i < points.size(); ++i) {
        Vec d(n);
        for (int j = 0; j < n; ++j) d[j] = points[i][j] - points[0][j];
        diffs.push_back(std::move(d));
    }
    return span_rank(diffs, n, tol);
}

inline double inradius_1d(const std::vector<Vec>& points) {
    double lo = points.front()[0], hi = lo;
    for (const Vec& p : points) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    if (lo >= 0.0 || hi <= 0.0) return 0.0;
    return std::min(-lo, hi);
}

// Andrew monotone chain; returns hull vertices in CCW order.
inline std::vector<std::array<double, 2>> hull_2d(const std::vector<Vec>& points) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(points.size());
    for (const Vec& p : points) pts.push_back({p[0], p[1]});
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t m = pts.size();
    if (m < 3) return pts;
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> hull(2 * m);
    size_t k = 0;
    for (size_t i = 0; i < m; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = m - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline double inradius_2d(const std::vector<Vec>& points) {
    const auto hull = hull_2d(points);
    if (hull.size() < 3) return 0.0;
    double r = std::numeric_limits<double>::infinity();
    const size_t m = hull.size();
    for (size_t i = 0; i < m; ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % m];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double len = std::hypot(ex, ey);
        if (len < 1e-300) continue;
        // hull is CCW, so (ey, -ex)/len is the outward normal
        const double d = (a[0] * ey - a[1] * ex) / len;
        r = std::min(r, d);
    }
    return (std::isfinite(r) && r > 0.0) ? r : 0.0;
}

// Incremental 3-D convex hull; returns min over facets of the distance from
// the origin to the facet plane, 0 if the origin is outside or on the boundary.
inline double inradius_3d(const std::vector<Vec>& input) {
    std::vector<Vec> pts;
    for (const Vec& p : input) {
        bool dup = false;
        for (const Vec& q : pts)
            if (dist(p, q) <= 1e-12) { dup = true; break; }
        if (!dup) pts.push_back(p);
    }
    const int m = static_cast<int>(pts.size());
    if (m < 4) return 0.0;

    double scale = 0.0;
    for (const Vec& p : pts) scale = std::max(scale, norm(p));
    const double eps = 1e-10 * std::max(scale, 1.0);

    auto sub = [](const Vec& a, const Vec& b) {
        return std::array<double, 3>{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
    };
    auto cross3 = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                     a[0] * b[1] - a[1] * b[0]};
    };
    auto dot3 = [](const std::array<double, 3>& a, const Vec& b) {
        return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    };

    // initial simplex: spread-out quadruple
    int i0 = 0, i1 = -1;
    double best = -1.0;
    for (int i = 1; i < m; ++i) {
        const double d = dist(pts[i], pts[i0]);
        if (d > best) { best = d; i1 = i; }
    }
    if (best < eps) return 0.0;
    int i2 = -1;
    best = -1.0;
    const auto e01 = sub(pts[i1], pts[i0]);
    for (int i = 0; i < m; ++i) {
        const auto v = sub(pts[i], pts[i0]);
        const auto c = cross3(e01, v);
        const double d = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        if (d > best) { best = d; i2 = i; }
    }
    if (best < eps) return 0.0;
    const auto n012 = cross3(e01, sub(pts[i2], pts[i0]));
    int i3 = -1;
    best = -1.0;
    for (int i = 0; i < m; ++i) {
        const double d = std::abs(dot3(n012, pts[i]) - dot3(n012, pts[i0]));
        if (d > best) { best = d; i3 = i; }
    }
    if (best < eps) return 0.0;  // coplanar orbit: hull has empty interior

    Vec centroid(3, 0.0);
    for (int i : {i0, i1, i2, i3})
        for (int j = 0; j < 3; ++j) centroid[j] += 0.25 * pts[i][j];

    struct Face {
        int a, b, c;
        std::array<double, 3> normal;  // outward, not normalized
        double offset;                 // <normal, p_a>
    };
    auto make_face = [&](int a, int b, int c) {
        Face f{a, b, c, {}, 0.0};
        f.normal = cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
        f.offset = dot3(f.normal, pts[a]);
        if (dot3(f.normal, centroid) > f.offset) {  // flip to outward
            std::swap(f.b, f.c);
            f.normal = {-f.normal[0], -f.normal[1], -f.normal[2]};
            f.offset = -f.offset;
        }
        return f;
    };

    std::vector<Face> faces = {make_face(i0, i1, i2), make_face(i0, i1, i3),
                               make_face(i0, i2, i3), make_face(i1, i2, i3)};

    for (int p = 0; p < m; ++p) {
        if (p == i0 || p == i1 || p == i2 || p == i3) continue;
        std::vector<char> visible(faces.size(), 0);
        bool any = false;
        for (size_t f = 0; f < faces.size(); ++f) {
            const double side = dot3(faces[f].normal, pts[p]) - faces[f].offset;
            const double nn = std::sqrt(dot3(faces[f].normal, {faces[f].normal[0],
                                        faces[f].normal[1], faces[f].normal[2]}));
            if (side > eps * std::max(nn, 1e-30)) { visible[f] = 1; any = true; }
        }
        if (!any) continue;
        std::map<std::pair<int, int>, int> edge_count;
        auto key = [](int u, int v) { return std::make_pair(std::min(u, v), std::max(u, v)); };
        for (size_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) continue;
            edge_count[key(faces[f].a, faces[f].b)]++;
            edge_count[key(faces[f].b, faces[f].c)]++;
            edge_count[key(faces[f].c, faces[f].a)]++;
        }
        std::vector<Face> kept;
        for (size_t f = 0; f < faces.size(); ++f)
            if (!visible[f]) kept.push_back(faces[f]);
        for (const auto& [e, cnt] : edge_count)
            if (cnt == 1) kept.push_back(make_face(e.first, e.second, p));
        faces = std::move(kept);
    }

    double r = std::numeric_limits<double>::infinity();
    for (const Face& f : faces) {
        const double nn = std::sqrt(f.normal[0] * f.normal[0] + f.normal[1] * f.normal[1] +
                                    f.normal[2] * f.normal[2]);
        if (nn < 1e-300) continue;
        r = std::min(r, f.offset / nn);
    }
    return (std::isfinite(r) && r > 0.0) ? r : 0.0;
}

// Acklam's rational approximation to the standard normal quantile.
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Largest r with B(0,r) inside the convex hull of the orbit points;
/// 0 when the hull has empty interior (degenerate orbit) or misses the origin.
inline double orbit_hull_inradius(const GroupOrbit& orb, int sample_fallback = 32768) {
    if (orb.points.empty()) return 0.0;
    const int n = static_cast<int>(orb.points.front().size());
    if (static_cast<int>(orb.points.size()) < n + 1) return 0.0;
    if (detail::affine_rank(orb.points, n) < n) return 0.0;  // DegenerateOrbit
    if (n == 1) return detail::inradius_1d(orb.points);
    if (n == 2) return detail::inradius_2d(orb.points);
    if (n == 3) return detail::inradius_3d(orb.points);
    // n >= 4: sampled support-function minimum (upper estimate); instances are
    // capped by the sample budget rather than by facet counts.
    double r = std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_fallback; ++s) {
        Vec u(n);
        double nu = 0.0;
        for (int i = 0; i < n; ++i) {
            const double frac = std::fmod((s + 1) * std::sqrt(2.0 + i) +
                                          0.5 * (i + 1), 1.0);
            u[i] = detail::inverse_normal_cdf(std::min(std::max(frac, 1e-12), 1.0 - 1e-12));
            nu += u[i] * u[i];
        }
        nu = std::sqrt(nu);
        double h = -std::numeric_limits<double>::infinity();
        for (const Vec& p : orb.points) h = std::max(h, dot(u, p) / nu);
        r = std::min(r, h);
        if (r <= 0.0) return 0.0;
    }
    return r;
}

/// Deterministic low-discrepancy unit vectors; prefix-stable, so enlarging
/// `count` only appends samples (keeps min-estimates monotone).
inline std::vector<Vec> sphere_samples(int n, int count) {
    std::vector<Vec> out;
    out.reserve(count);
    if (n == 1) {
        for (int s = 0; s < count; ++s) out.push_back(Vec{s % 2 == 0 ? 1.0 : -1.0});
        return out;
    }
    if (n == 2) {
        const double golden = 0.6180339887498949;
        for (int s = 0; s < count; ++s) {
            const double t = 2.0 * M_PI * std::fmod(0.5 + s * golden, 1.0);
            out.push_back(Vec{std::cos(t), std::sin(t)});
        }
        return out;
    }
    if (n == 3) {
        // R2 Kronecker sequence mapped area-preservingly to the sphere
        const double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
        for (int s = 0; s < count; ++s) {
            const double u = std::fmod(0.5 + s * a1, 1.0);
            const double v = std::fmod(0.5 + s * a2, 1.0);
            const double z = 2.0 * u - 1.0;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back(Vec{rho * std::cos(2.0 * M_PI * v), rho * std::sin(2.0 * M_PI * v), z});
        }
        return out;
    }
    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (int s = 0; s < count; ++s) {
        Vec v(n);
        double nv = 0.0;
        for (int i = 0; i < n; ++i) {
            const double frac = std::fmod(0.5 + (s + 1) * std::sqrt(primes[i % 12]), 1.0);
            v[i] = detail::inverse_normal_cdf(std::min(std::max(frac, 1e-12), 1.0 - 1e-12));
            nv += v[i] * v[i];
        }
        nv = std::sqrt(std::max(nv, 1e-24));
        for (int i = 0; i < n; ++i) v[i] /= nv;
        out.push_back(std::move(v));
    }
    return out;
}

/// min over sampled unit x of orbit_hull_inradius(orbit(x)); the sampled
/// surrogate for the Lemma-1 constant.
inline double lemma1_epsilon(const OrthogonalGroupSpec& group, int sphere_sample_count) {
    if (!group.finite()) throw InvalidArgument("lemma1_epsilon: requires explicit-finite mode");
    const auto dirs = sphere_samples(group.dimension, sphere_sample_count);
    double eps = std::numeric_limits<double>::infinity();
    for (const Vec& u : dirs) {
        const double r = orbit_hull_inradius(orbit(u, group));
        eps = std::min(eps, r);
        if (eps <= 0.0) return 0.0;
    }
    return std::isfinite(eps) ? eps : 0.0;
}

/// Irreducibility certificate: span rank of a generic orbit, the orbit
/// center-of-mass norm, and the sampled Lemma-1 epsilon.
/// Full-rotation groups are irreducible with epsilon 1 (orbits are spheres).
inline IrreducibilityCertificate check_irreducible(const OrthogonalGroupSpec& group,
                                                   double tol = 1e-9,
                                                   int sphere_sample_count = 4096) {
    IrreducibilityCertificate cert;
    const int n = group.dimension;
    if (!group.finite()) {
        cert.epsilon = 1.0;
        cert.span_rank = n;
        cert.center_of_mass_norm = 0.0;
        cert.verdict = true;
        cert.sphere_samples = 0;
        return cert;
    }

    // generic unit vector with no structural alignment
    Vec x0(n);
    for (int i = 0; i < n; ++i) x0[i] = 1.0 / std::sqrt(2.0 + i);
    const double nx = norm(x0);
    for (int i = 0; i < n; ++i) x0[i] /= nx;

    const GroupOrbit orb = orbit(x0, group);
    cert.span_rank = detail::span_rank(orb.points, n);

    Vec com(n, 0.0);
    for (const Mat& g : group.elements) {
        const Vec gx = g.apply(x0);
        for (int i = 0; i < n; ++i) com[i] += gx[i];
    }
    for (int i = 0; i < n; ++i) com[i] /= group.order();
    cert.center_of_mass_norm = norm(com);

    cert.epsilon = lemma1_epsilon(group, sphere_sample_count);
    cert.sphere_samples = sphere_sample_count;
    cert.verdict = (cert.span_rank == n) && (cert.epsilon > tol);
    return cert;
}

}  // namespace maent
