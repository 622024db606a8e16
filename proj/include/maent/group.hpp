// Finite subgroups of O(n): closure from generators, named presets, orbits
// and group-averaging of scalar fields.
#pragma once

#include <algorithm>
#include <functional>
#include <sstream>

#include "maent/core.hpp"

namespace maent {

constexpr double kOrthogonalityTol = 1e-10;
constexpr double kClosureDedupTol = 1e-8;
constexpr double kOrbitDedupTol = 1e-10;

struct OrthogonalGroupSpec {
    enum class Mode { ExplicitFinite, FullRotation };

    int dimension = 0;
    std::vector<Mat> elements;  // closed under product and inverse; contains I
    Mode mode = Mode::ExplicitFinite;

    int order() const { return static_cast<int>(elements.size()); }
    bool finite() const { return mode == Mode::ExplicitFinite; }
};

struct GroupOrbit {
    Vec base;
    std::vector<Vec> points;
};

struct IrreducibilityCertificate {
    double epsilon = 0.0;
    int span_rank = 0;
    double center_of_mass_norm = 0.0;
    bool verdict = false;
    int sphere_samples = 0;  // sample count behind the epsilon estimate
};

namespace detail {

inline bool matrix_in_list(const std::vector<Mat>& list, const Mat& m, double tol) {
    for (const Mat& e : list)
        if (e.max_abs_diff(m) <= tol) return true;
    return false;
}

}  // namespace detail

/// Closes a generator set under multiplication (BFS over products).
/// Throws ClosureOverflow when the closure exceeds `cap`, which is the
/// signature of an infinite (or impractically large) group.
inline OrthogonalGroupSpec close_group(const std::vector<Mat>& generators, int cap) {
    if (generators.empty()) throw InvalidArgument("close_group: no generators");
    const int n = generators.front().n;
    for (const Mat& g : generators) {
        if (g.n != n) throw InvalidArgument("close_group: mixed dimensions");
        if (orthogonality_defect(g) > kOrthogonalityTol)
            throw InvalidArgument("close_group: generator is not orthogonal within 1e-10");
    }

    OrthogonalGroupSpec spec;
    spec.dimension = n;
    spec.mode = OrthogonalGroupSpec::Mode::ExplicitFinite;
    spec.elements.push_back(Mat::identity(n));

    std::vector<Mat> frontier = spec.elements;
    while (!frontier.empty()) {
        std::vector<Mat> next;
        for (const Mat& e : frontier) {
            for (const Mat& g : generators) {
                Mat p = g.times(e);
                if (detail::matrix_in_list(spec.elements, p, kClosureDedupTol)) continue;
                spec.elements.push_back(p);
                if (static_cast<int>(spec.elements.size()) > cap) {
                    std::ostringstream os;
                    os << "close_group: closure exceeds cap " << cap
                       << " (group may be infinite; consider full-rotation mode)";
                    throw ClosureOverflow(os.str());
                }
                next.push_back(std::move(p));
            }
        }
        frontier = std::move(next);
    }
    return spec;
}

/// Orbit K.x, deduplicated.
inline GroupOrbit orbit(const Vec& x, const OrthogonalGroupSpec& group) {
    if (!group.finite()) throw InvalidArgument("orbit: requires explicit-finite mode");
    if (static_cast<int>(x.size()) != group.dimension)
        throw InvalidArgument("orbit: dimension mismatch");
    GroupOrbit orb;
    orb.base = x;
    for (const Mat& g : group.elements) {
        Vec p = g.apply(x);
        bool dup = false;
        for (const Vec& q : orb.points)
            if (dist(p, q) <= kOrbitDedupTol) { dup = true; break; }
        if (!dup) orb.points.push_back(std::move(p));
    }
    return orb;
}

/// Group average x -> (1/|K|) sum_g h(g x). K-invariant by construction.
inline std::function<double(const Vec&)> symmetrize_function(
    std::function<double(const Vec&)> h, const OrthogonalGroupSpec& group) {
    if (!group.finite())
        throw InvalidArgument("symmetrize_function: requires explicit-finite mode");
    auto elements = group.elements;  // own a copy; the lambda outlives the caller
    return [h = std::move(h), elements = std::move(elements)](const Vec& x) {
        double s = 0.0;
        for (const Mat& g : elements) s += h(g.apply(x));
        return s / static_cast<double>(elements.size());
    };
}

// ---------------------------------------------------------------------------
// Presets: "cyclic:m", "dihedral:m", "hyperoctahedral:n", "neg-identity:n",
//          "full-rotation:n". Explicit matrices go through close_group directly.
// ---------------------------------------------------------------------------

inline OrthogonalGroupSpec group_preset(const std::string& descriptor, int cap = 20000) {
    const auto colon = descriptor.find(':');
    if (colon == std::string::npos)
        throw ConfigError("group preset must look like name:param, got '" + descriptor + "'");
    const std::string name = descriptor.substr(0, colon);
    int param = 0;
    try {
        param = std::stoi(descriptor.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("group preset parameter is not an integer: '" + descriptor + "'");
    }
    if (param <= 0) throw ConfigError("group preset parameter must be positive");

    if (name == "cyclic") {
        return close_group({rotation2d(2.0 * M_PI / param)}, std::max(cap, param + 1));
    }
    if (name == "dihedral") {
        Mat reflect = Mat::identity(2);
        reflect(1, 1) = -1.0;  // mirror across the x-axis
        return close_group({rotation2d(2.0 * M_PI / param), reflect},
                           std::max(cap, 2 * param + 1));
    }
    if (name == "neg-identity") {
        Mat neg(param);
        for (int i = 0; i < param; ++i) neg(i, i) = -1.0;
        return close_group({neg}, 4);
    }
    if (name == "hyperoctahedral") {
        const int n = param;
        std::vector<Mat> gens;
        for (int i = 0; i + 1 < n; ++i) {
            Mat swap = Mat::identity(n);
            swap(i, i) = swap(i + 1, i + 1) = 0.0;
            swap(i, i + 1) = swap(i + 1, i) = 1.0;
            gens.push_back(swap);
        }
        Mat flip = Mat::identity(n);
        flip(0, 0) = -1.0;
        gens.push_back(flip);
        // order 2^n n!: 8, 48, 384 for n = 2, 3, 4
        int ord = 1;
        for (int i = 2; i <= n; ++i) ord *= i;
        for (int i = 0; i < n; ++i) ord *= 2;
        if (n == 1) { gens.clear(); gens.push_back(flip); ord = 2; }
        return close_group(gens, std::max(cap, ord + 1));
    }
    if (name == "full-rotation") {
        OrthogonalGroupSpec spec;
        spec.dimension = param;
        spec.mode = OrthogonalGroupSpec::Mode::FullRotation;
        spec.elements.push_back(Mat::identity(param));
        return spec;
    }
    throw ConfigError("unknown group preset '" + name + "'");
}

/// Smallest positive rotation order present in a 2-D group (1 if none);
/// used to align angular grids with the group action.
inline int rotation_order_2d(const OrthogonalGroupSpec& group) {
    if (group.dimension != 2 || !group.finite()) return 1;
    int best = 1;
    for (const Mat& g : group.elements) {
        const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
        if (det < 0.0) continue;  // reflection
        double ang = std::atan2(g(1, 0), g(0, 0));
        if (ang < 0.0) ang += 2.0 * M_PI;
        if (ang < 1e-12) continue;
        const double m = 2.0 * M_PI / ang;
        const int mi = static_cast<int>(std::lround(m));
        if (mi > best && std::abs(m - mi) < 1e-6) best = std::max(best, mi);
    }
    return std::max(best, 1);
}

}  // namespace maent
