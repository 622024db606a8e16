// Exact reference solver for rotation-invariant data. On balls the measure
// identity reduces to the one-dimensional mass balance
//     G(R) = F(phi'(R)),   F(rho) = int_{B_rho} f,  G(R) = int_{B_R} g,
// so phi'(R) = F^{-1}(G(R)) and phi follows by integration. This module is
// the independent oracle for the max-affine solver and also the inner solver
// for full-rotation groups.
#pragma once

#include <fstream>
#include <iomanip>

#include "maent/density.hpp"
#include "maent/plconvex.hpp"

namespace maent {

struct RadialSolution {
    int dim = 0;
    std::vector<double> r;     // 0 = r_0 < ... < r_steps = R_max
    std::vector<double> phi;   // phi(r_i), phi(0) = 0
    std::vector<double> dphi;  // phi'(r_i), nondecreasing, dphi[0] = 0 when g(0) finite

    double eval_dphi(double rr) const { return interp(dphi, rr); }
    double eval_phi(double rr) const { return interp(phi, rr); }

  private:
    double interp(const std::vector<double>& v, double rr) const {
        rr = std::abs(rr);
        if (rr <= r.front()) return v.front();
        if (rr >= r.back()) return v.back();
        const auto it = std::upper_bound(r.begin(), r.end(), rr);
        const size_t j = static_cast<size_t>(it - r.begin());
        const double t = (rr - r[j - 1]) / (r[j] - r[j - 1]);
        return (1.0 - t) * v[j - 1] + t * v[j];
    }
};

namespace detail {

template <class FDensity>
void require_invertible_mass(const FDensity& f, double probe_radius) {
    // f may vanish at isolated points but not on an interval
    const int m = 512;
    int zero_run = 0;
    for (int i = 0; i <= m; ++i) {
        const double fr = f.eval_radial(probe_radius * i / m);
        if (fr <= 0.0) {
            if (++zero_run >= 3)
                throw InversionFailure(
                    "solve_radial: f vanishes on an interval, mass profile not invertible");
        } else {
            zero_run = 0;
        }
    }
}

}  // namespace detail

/// phi'(R) = F^{-1}(G(R)) per grid radius, phi by trapezoidal integration.
/// The defining identity is re-verified at every grid point.
template <class FDensity, class GDensity>
RadialSolution solve_radial(const FDensity& f, const GDensity& g, double R_max, int steps = 1024) {
    if (R_max <= 0.0 || steps < 2) throw InvalidArgument("solve_radial: bad grid");
    const int n = f.dimension();
    if (g.dimension() != n) throw InvalidArgument("solve_radial: dimension mismatch");

    RadialSolution sol;
    sol.dim = n;
    const double h = R_max / steps;

    // probe far enough to cover the expected slope range
    detail::require_invertible_mass(f, 4.0 * R_max + 4.0);

    const double g_total = ball_mass(g, R_max);
    double rho_hi = R_max;
    while (ball_mass(f, rho_hi) < g_total) {
        rho_hi *= 2.0;
        if (rho_hi > 1e9) throw InversionFailure("solve_radial: slope range exploded");
    }

    sol.r.resize(steps + 1);
    sol.phi.resize(steps + 1);
    sol.dphi.resize(steps + 1);
    sol.r[0] = 0.0;
    sol.phi[0] = 0.0;
    sol.dphi[0] = 0.0;

    double lo_prev = 0.0;
    for (int i = 1; i <= steps; ++i) {
        const double R = i * h;
        sol.r[i] = R;
        const double target = ball_mass(g, R);
        // monotone bracket: phi' is nondecreasing in R
        double lo = lo_prev, hi = rho_hi;
        double flo = ball_mass(f, lo) - target, fhi = ball_mass(f, hi) - target;
        while (fhi < 0.0) {
            hi *= 2.0;
            fhi = ball_mass(f, hi) - target;
            if (hi > 1e9) throw InversionFailure("solve_radial: inversion bracket exploded");
        }
        double mid = lo;
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (lo + hi);
            if (fhi != flo) {
                const double sec = hi - fhi * (hi - lo) / (fhi - flo);
                if (sec > lo + 0.05 * (hi - lo) && sec < hi - 0.05 * (hi - lo)) mid = sec;
            }
            const double fm = ball_mass(f, mid) - target;
            if (std::abs(fm) <= 1e-11 * std::max(target, 1e-300) || hi - lo < 1e-15 * (1.0 + hi))
                break;
            if (fm < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
        }
        sol.dphi[i] = mid;
        lo_prev = mid;
        // defining identity check
        if (std::abs(ball_mass(f, mid) - target) > 1e-8 * std::max(target, 1e-300))
            throw InversionFailure("solve_radial: mass-balance identity violated at r=" +
                                   std::to_string(R));
        sol.phi[i] = sol.phi[i - 1] + 0.5 * h * (sol.dphi[i - 1] + sol.dphi[i]);
    }
    return sol;
}

/// Pointwise residual of f(phi') phi'' (phi'/r)^{n-1} = g with phi'' by
/// central differences on the solution grid.
template <class FDensity, class GDensity>
double residual_check(const RadialSolution& sol, const FDensity& f, const GDensity& g,
                      const std::vector<double>& sample_radii) {
    const int n = sol.dim;
    const size_t m = sol.r.size();
    if (m < 3) throw InvalidArgument("residual_check: solution grid too small");
    const double h = sol.r[1] - sol.r[0];
    double worst = 0.0;
    for (double rr : sample_radii) {
        size_t i = static_cast<size_t>(std::lround(rr / h));
        i = std::min(std::max<size_t>(i, 1), m - 2);
        const double r = sol.r[i];
        if (r <= 0.0) continue;
        const double d1 = sol.dphi[i];
        const double d2 = (sol.dphi[i + 1] - sol.dphi[i - 1]) / (2.0 * h);
        const double det = d2 * std::pow(d1 / r, n - 1);
        const double lhs = f.eval_radial(d1) * det;
        const double rhs = g.eval_radial(r);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(rhs, 1e-12));
    }
    return worst;
}

/// Max-affine sampling of the radial solution: tangent planes at radii x
/// directions. Used to hand oracle solutions to the measure and diagnostics
/// machinery in the common PL format.
inline PLConvexFunction pl_from_radial(const RadialSolution& sol, int directions,
                                       int radial_samples) {
    const int n = sol.dim;
    PLConvexFunction f(n);
    const Vec zero(n, 0.0);
    f.add_piece(zero, -0.0);  // tangent at the origin (phi(0)=0, phi'(0)=0)
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs = {Vec{1.0}, Vec{-1.0}};
    } else if (n == 2) {
        for (int t = 0; t < directions; ++t) {
            const double a = 2.0 * M_PI * (t + 0.5) / directions;
            dirs.push_back(Vec{std::cos(a), std::sin(a)});
        }
    } else {
        dirs = sphere_samples(n, directions);
    }
    const double R = sol.r.back();
    Vec s(n);
    for (int i = 1; i <= radial_samples; ++i) {
        const double r = R * i / radial_samples;
        const double dp = sol.eval_dphi(r);
        const double c = r * dp - sol.eval_phi(r);
        for (const Vec& u : dirs) {
            for (int j = 0; j < n; ++j) s[j] = dp * u[j];
            f.add_piece(s, c);
        }
    }
    return f;
}

inline void write_radial_csv(const RadialSolution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "r,phi,dphi\n" << std::setprecision(17);
    for (size_t i = 0; i < sol.r.size(); ++i)
        out << sol.r[i] << ',' << sol.phi[i] << ',' << sol.dphi[i] << '\n';
}

}  // namespace maent
