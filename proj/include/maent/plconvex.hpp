// Piecewise-linear convex functions as finite maxima of affine pieces
// value(x) = max_i <slope_i, x> - intercept_i, with the multivalued gradient
// given by the active pieces. Includes the grid-realized Legendre transform
// and the structured-file (de)serialization.
#pragma once

#include <json.hpp>

#include "maent/core.hpp"
#include "maent/geometry.hpp"

namespace maent {

class PLConvexFunction {
  public:
    PLConvexFunction() = default;
    explicit PLConvexFunction(int dim) : dim_(dim) {}

    int dimension() const { return dim_; }
    int size() const { return static_cast<int>(intercepts_.size()); }
    bool empty() const { return intercepts_.empty(); }

    const double* slope(int i) const { return slopes_.data() + static_cast<size_t>(i) * dim_; }
    double intercept(int i) const { return intercepts_[i]; }
    const std::vector<double>& slopes_flat() const { return slopes_; }
    const std::vector<double>& intercepts() const { return intercepts_; }

    /// Orbit label per piece when built by the symmetry-reduced solver
    /// (empty otherwise); labels only affect serialization order.
    const std::vector<int>& orbit_labels() const { return orbit_of_; }

    void add_piece(const double* slope, double intercept, int orbit = -1) {
        slopes_.insert(slopes_.end(), slope, slope + dim_);
        intercepts_.push_back(intercept);
        orbit_of_.push_back(orbit);
    }
    void add_piece(const Vec& slope, double intercept, int orbit = -1) {
        add_piece(slope.data(), intercept, orbit);
    }

    double value(const double* x) const {
        double best = -std::numeric_limits<double>::infinity();
        const int m = size();
        for (int i = 0; i < m; ++i) {
            const double v = dot(slope(i), x, dim_) - intercepts_[i];
            if (v > best) best = v;
        }
        return best;
    }
    double value(const Vec& x) const { return value(x.data()); }

    /// Lowest index among maximizing pieces (the tie rule used everywhere).
    int argmax_lowest(const double* x) const {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        const int m = size();
        for (int i = 0; i < m; ++i) {
            const double v = dot(slope(i), x, dim_) - intercepts_[i];
            if (v > best) { best = v; arg = i; }
        }
        return arg;
    }
    int argmax_lowest(const Vec& x) const { return argmax_lowest(x.data()); }

    /// One element of the subdifferential: the slope of the lowest-index
    /// active piece.
    Vec gradient_select(const Vec& x) const {
        const int i = argmax_lowest(x.data());
        return Vec(slope(i), slope(i) + dim_);
    }

    /// All pieces active at x within an absolute tolerance; their convex hull
    /// is the subdifferential.
    std::vector<int> active_pieces(const double* x, double tol) const {
        const double v = value(x);
        std::vector<int> act;
        const int m = size();
        for (int i = 0; i < m; ++i)
            if (dot(slope(i), x, dim_) - intercepts_[i] >= v - tol) act.push_back(i);
        return act;
    }
    std::vector<Vec> active_slopes(const Vec& x, double tol) const {
        std::vector<Vec> out;
        for (int i : active_pieces(x.data(), tol))
            out.emplace_back(slope(i), slope(i) + dim_);
        return out;
    }

    double max_slope_norm() const {
        double m = 0.0;
        for (int i = 0; i < size(); ++i) m = std::max(m, norm(slope(i), dim_));
        return m;
    }

    /// Shift all intercepts so that value(0) = 0; gradients unchanged.
    PLConvexFunction normalized_at_origin() const {
        PLConvexFunction out = *this;
        const Vec zero(dim_, 0.0);
        const double v0 = value(zero);
        for (double& c : out.intercepts_) c += v0;
        return out;
    }

    /// Drop pieces that never win (within tol) on a probe grid over B_R.
    PLConvexFunction pruned_on_ball(double R, int res, double tol = 1e-11) const {
        std::vector<char> keep(size(), 0);
        const auto probes = ball_lattice(dim_, R, res);
        Vec x(dim_);
        for (size_t p = 0; p < probes.size(); p += dim_) {
            for (int j = 0; j < dim_; ++j) x[j] = probes[p + j];
            const double v = value(x.data());
            const double t = tol * (1.0 + std::abs(v));
            for (int i = 0; i < size(); ++i)
                if (dot(slope(i), x.data(), dim_) - intercepts_[i] >= v - t) keep[i] = 1;
        }
        PLConvexFunction out(dim_);
        for (int i = 0; i < size(); ++i)
            if (keep[i]) out.add_piece(slope(i), intercepts_[i], orbit_of_[i]);
        if (out.empty() && size() > 0) out.add_piece(slope(0), intercepts_[0], orbit_of_[0]);
        return out;
    }

    /// Deterministic piece order: orbit label, then lexicographic slope.
    void sort_canonical() {
        std::vector<int> idx(size());
        for (int i = 0; i < size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            if (orbit_of_[a] != orbit_of_[b]) return orbit_of_[a] < orbit_of_[b];
            for (int j = 0; j < dim_; ++j) {
                const double sa = slope(a)[j], sb = slope(b)[j];
                if (sa != sb) return sa < sb;
            }
            return intercepts_[a] < intercepts_[b];
        });
        PLConvexFunction out(dim_);
        for (int i : idx) out.add_piece(slope(i), intercepts_[i], orbit_of_[i]);
        *this = std::move(out);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n"] = dim_;
        nlohmann::json pieces = nlohmann::json::array();
        for (int i = 0; i < size(); ++i) {
            nlohmann::json p;
            p["slope"] = std::vector<double>(slope(i), slope(i) + dim_);
            p["intercept"] = intercepts_[i];
            pieces.push_back(std::move(p));
        }
        j["pieces"] = std::move(pieces);
        return j;
    }

    static PLConvexFunction from_json(const nlohmann::json& j) {
        if (!j.contains("n") || !j.contains("pieces"))
            throw ConfigError("solution file: missing 'n' or 'pieces'");
        const int n = j.at("n").get<int>();
        if (n <= 0) throw ConfigError("solution file: dimension must be positive");
        PLConvexFunction f(n);
        for (const auto& p : j.at("pieces")) {
            const auto s = p.at("slope").get<std::vector<double>>();
            if (static_cast<int>(s.size()) != n)
                throw ConfigError("solution file: slope length mismatch");
            f.add_piece(s.data(), p.at("intercept").get<double>());
        }
        if (f.empty()) throw ConfigError("solution file: no pieces");
        return f;
    }

    /// Candidate lattice used by the Legendre transform: h Z^n restricted to
    /// the closed ball of radius R, h = R / res. Flat storage.
    static std::vector<double> ball_lattice(int dim, double R, int res) {
        std::vector<double> pts;
        const double h = R / std::max(res, 1);
        std::vector<int> z(dim, -res);
        while (true) {
            double r2 = 0.0;
            for (int j = 0; j < dim; ++j) r2 += (h * z[j]) * (h * z[j]);
            if (r2 <= R * R * (1.0 + 1e-14))
                for (int j = 0; j < dim; ++j) pts.push_back(h * z[j]);
            int j = dim - 1;
            while (j >= 0 && z[j] == res) { z[j] = -res; --j; }
            if (j < 0) break;
            ++z[j];
        }
        return pts;
    }

  private:
    int dim_ = 0;
    std::vector<double> slopes_;      // size()*dim_
    std::vector<double> intercepts_;  // size()
    std::vector<int> orbit_of_;       // size()
};

inline PLConvexFunction normalize_at_origin(const PLConvexFunction& f) {
    return f.normalized_at_origin();
}

// ---------------------------------------------------------------------------
// Legendre transform on a ball domain, realized on a grid
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> sphere_ring(int dim, double R, int count) {
    std::vector<double> pts;
    if (dim == 1) {
        pts = {R, -R};
        return pts;
    }
    if (dim == 2) {
        for (int t = 0; t < count; ++t) {
            const double a = 2.0 * M_PI * t / count;
            pts.push_back(R * std::cos(a));
            pts.push_back(R * std::sin(a));
        }
        return pts;
    }
    const auto dirs = sphere_samples(dim, count);
    for (const Vec& u : dirs)
        for (double c : u) pts.push_back(R * c);
    return pts;
}

}  // namespace detail

/// psi(y) = max over candidate x in closed B_R of <x,y> - phi(x). Candidates
/// are the ball lattice plus a boundary shell (the shell carries the linear
/// growth of the conjugate outside the slope hull). The result is exactly the
/// conjugate of phi restricted to the candidate set, so the Fenchel inequality
/// holds with equality semantics on candidates and the double transform
/// reproduces phi at interior lattice points.
inline PLConvexFunction legendre_transform(const PLConvexFunction& phi, double domain_radius,
                                           int res) {
    if (phi.empty()) throw InvalidArgument("legendre_transform: phi has no pieces");
    const int n = phi.dimension();
    std::vector<double> candidates = PLConvexFunction::ball_lattice(n, domain_radius, res);
    const int ring = (n == 2) ? 8 * res : (n == 1 ? 2 : 4 * res * res);
    const auto shell = detail::sphere_ring(n, domain_radius, ring);
    candidates.insert(candidates.end(), shell.begin(), shell.end());

    PLConvexFunction psi(n);
    Vec x(n);
    for (size_t p = 0; p < candidates.size(); p += n) {
        for (int j = 0; j < n; ++j) x[j] = candidates[p + j];
        psi.add_piece(x, phi.value(x.data()));
    }
    return psi;
}

// ---------------------------------------------------------------------------
// Common PL constructions
// ---------------------------------------------------------------------------

/// Tangent-plane sampling of a|x|^2/2 over the lattice in B_R.
inline PLConvexFunction make_pl_quadratic(int dim, double a, double radius, int res) {
    PLConvexFunction f(dim);
    const auto pts = PLConvexFunction::ball_lattice(dim, radius, res);
    Vec s(dim);
    for (size_t p = 0; p < pts.size(); p += dim) {
        double q = 0.0;
        for (int j = 0; j < dim; ++j) {
            s[j] = a * pts[p + j];
            q += pts[p + j] * pts[p + j];
        }
        f.add_piece(s, 0.5 * a * q);
    }
    return f;
}

/// PL approximation of |x| as a max of unit slopes (intercept 0).
inline PLConvexFunction make_pl_cone(int dim, int directions) {
    PLConvexFunction f(dim);
    if (dim == 1) {
        f.add_piece(Vec{1.0}, 0.0);
        f.add_piece(Vec{-1.0}, 0.0);
        return f;
    }
    if (dim == 2) {
        for (int t = 0; t < directions; ++t) {
            const double ang = 2.0 * M_PI * t / directions;
            f.add_piece(Vec{std::cos(ang), std::sin(ang)}, 0.0);
        }
        return f;
    }
    for (const Vec& u : sphere_samples(dim, directions)) f.add_piece(u, 0.0);
    return f;
}

}  // namespace maent
