// Deterministic tensor-style quadrature grids on balls B_R. Polar/spherical
// products cover the ball exactly (no jagged indicator boundary), and the
// angular count can be aligned with a finite rotation group so that the grid
// is invariant under the group action.
#pragma once

#include "maent/core.hpp"

namespace maent {

struct BallGrid {
    int dim = 0;
    double radius = 0.0;
    std::vector<double> nodes;    // count*dim
    std::vector<double> weights;  // count
    std::vector<double> band;     // local node extent, used for antialiased assignment
    size_t count = 0;

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

inline int round_up_multiple(int value, int m) {
    if (m <= 1) return value;
    return ((value + m - 1) / m) * m;
}

/// res ~ nodes per radius (n=1: nodes per half-interval). angular_align makes
/// the angular count a multiple of the group's rotation order.
inline BallGrid build_ball_grid(int dim, double R, int res, int angular_align = 1) {
    BallGrid g;
    g.dim = dim;
    g.radius = R;
    if (dim == 1) {
        const int m = 2 * res;
        const double h = 2.0 * R / m;
        for (int i = 0; i < m; ++i) {
            g.nodes.push_back(-R + (i + 0.5) * h);
            g.weights.push_back(h);
            g.band.push_back(h);
        }
    } else if (dim == 2) {
        const int nr = res;
        const int nt = std::max(angular_align, round_up_multiple(res, angular_align));
        const double hr = R / nr, ht = 2.0 * M_PI / nt;
        for (int i = 0; i < nr; ++i) {
            const double rlo = i * hr, rhi = (i + 1) * hr;
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
    } else if (dim == 3) {
        const int nr = res;
        const int nz = std::max(4, res / 2);
        const int nt = std::max(angular_align, round_up_multiple(res, angular_align));
        const double hr = R / nr, hz = 2.0 / nz, ht = 2.0 * M_PI / nt;
        for (int i = 0; i < nr; ++i) {
            const double rlo = i * hr, rhi = (i + 1) * hr;
            const double rc = 0.5 * (rlo + rhi);
            const double wr = (rhi * rhi * rhi - rlo * rlo * rlo) / 3.0;
            for (int iz = 0; iz < nz; ++iz) {
                const double z = -1.0 + (iz + 0.5) * hz;
                const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                for (int j = 0; j < nt; ++j) {
                    const double t = (j + 0.5) * ht;
                    g.nodes.push_back(rc * rho * std::cos(t));
                    g.nodes.push_back(rc * rho * std::sin(t));
                    g.nodes.push_back(rc * z);
                    g.weights.push_back(wr * hz * ht);
                    g.band.push_back(std::cbrt(std::max(wr * hz * ht, 1e-300)));
                }
            }
        }
    } else {
        // cartesian midpoint grid with ball indicator; weights sum to |B_R|
        // only up to the boundary-cell error, which is fine for the n>=4
        // fallback role of this grid
        const int m = 2 * res;
        const double h = 2.0 * R / m;
        std::vector<int> z(dim, 0);
        const double cell = std::pow(h, dim);
        while (true) {
            Vec x(dim);
            double r2 = 0.0;
            for (int j = 0; j < dim; ++j) {
                x[j] = -R + (z[j] + 0.5) * h;
                r2 += x[j] * x[j];
            }
            if (r2 <= R * R) {
                g.nodes.insert(g.nodes.end(), x.begin(), x.end());
                g.weights.push_back(cell);
                g.band.push_back(h);
            }
            int j = dim - 1;
            while (j >= 0 && z[j] == m - 1) { z[j] = 0; --j; }
            if (j < 0) break;
            ++z[j];
        }
    }
    g.count = g.weights.size();
    return g;
}

}  // namespace maent
