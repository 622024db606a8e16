// Small shared pieces: runtime-dimension vectors, orthogonal matrices,
// deterministic RNG helpers and the error taxonomy used across the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace maent {

using Vec = std::vector<double>;

inline double dot(const double* a, const double* b, int n) {
    if (n == 2) return a[0] * b[0] + a[1] * b[1];
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const Vec& a, const Vec& b) {
    return dot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double norm2(const double* a, int n) { return dot(a, a, n); }
inline double norm(const double* a, int n) { return std::sqrt(norm2(a, n)); }
inline double norm(const Vec& a) { return norm(a.data(), static_cast<int>(a.size())); }

inline double dist(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double dist(const Vec& a, const Vec& b) {
    return dist(a.data(), b.data(), static_cast<int>(a.size()));
}

/// Dense square matrix, row-major; used only for orthogonal group elements.
struct Mat {
    int n = 0;
    std::vector<double> a;  // n*n, row-major

    Mat() = default;
    explicit Mat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0.0) {}

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m.a[static_cast<size_t>(i) * dim + i] = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    Vec apply(const Vec& x) const {
        Vec y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += a[static_cast<size_t>(i) * n + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    // y = M x for flat storage
    void apply(const double* x, double* y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += a[static_cast<size_t>(i) * n + j] * x[j];
            y[i] = s;
        }
    }

    Mat times(const Mat& other) const {
        Mat r(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < n; ++j) r(i, j) += aik * other(k, j);
            }
        return r;
    }

    Mat transposed() const {
        Mat r(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    double max_abs_diff(const Mat& other) const {
        double m = 0.0;
        for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - other.a[i]));
        return m;
    }
};

/// ||M^T M - I||_inf, the orthogonality defect.
inline double orthogonality_defect(const Mat& m) {
    const Mat g = m.transposed().times(m);
    double d = 0.0;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    return d;
}

inline Mat rotation2d(double angle) {
    Mat m(2);
    m(0, 0) = std::cos(angle);
    m(0, 1) = -std::sin(angle);
    m(1, 0) = std::sin(angle);
    m(1, 1) = std::cos(angle);
    return m;
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgument : Error { using Error::Error; };
struct ClosureOverflow : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct DegenerateTargets : Error { using Error::Error; };
struct EmptyCellStall : Error { using Error::Error; };
struct InversionFailure : Error { using Error::Error; };
struct EmptySublevel : Error { using Error::Error; };
struct InsufficientVariation : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Deterministic sampling helpers
// ---------------------------------------------------------------------------

/// Uniform double in [0,1) from a raw 64-bit generator, implementation-stable.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

/// Standard normal via Box-Muller on raw uniforms (keeps streams portable).
inline double normal01(std::mt19937_64& gen) {
    double u1 = uniform01(gen);
    while (u1 <= 0.0) u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vec random_unit_vector(std::mt19937_64& gen, int n) {
    Vec v(n);
    double r2 = 0.0;
    do {
        r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            v[i] = normal01(gen);
            r2 += v[i] * v[i];
        }
    } while (r2 < 1e-24);
    const double inv = 1.0 / std::sqrt(r2);
    for (int i = 0; i < n; ++i) v[i] *= inv;
    return v;
}

}  // namespace maent
