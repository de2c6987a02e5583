#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "veq/errors.hpp"
#include "veq/model.hpp"
#include "veq/saddle.hpp"

namespace veq {

enum class Axis { real, imaginary };

/// Discretized nonnegative measure: cell-center nodes, widths, and one mass
/// weight per cell. On the imaginary axis a node t stands for the point it.
struct GridMeasure {
    Axis axis = Axis::real;
    std::vector<double> nodes;
    std::vector<double> cell_widths;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    double total_mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

    double density(std::size_t i) const { return weights[i] / cell_widths[i]; }

    /// index of the mirror node (-nodes[i]); grids are built symmetric
    std::size_t mirror(std::size_t i) const { return nodes.size() - 1 - i; }
};

struct GridConfig {
    double X1 = 0.0; // truncation of the mu1 domain; 0 = confinement rule
    double Y2 = 0.0; // truncation of the mu2 domain; 0 = tail-mass rule
    double X3 = 0.0; // truncation of the mu3 domain; 0 = tail-mass rule
    int n1 = 640;
    int n2 = 800;
    int n3 = 800;
    double tail_tol = 1e-3;
    bool refine_edges = false;

    void validate() const {
        if (n1 < 64 || n2 < 64 || n3 < 64) throw ConfigError("GridConfig: node counts must be >= 64");
        if (X1 < 0.0 || Y2 < 0.0 || X3 < 0.0) throw ConfigError("GridConfig: truncations must be nonnegative");
        if (!(tail_tol > 0.0)) throw ConfigError("GridConfig: tail_tol must be positive");
    }
};

struct Grids {
    GridMeasure mu1, mu2, mu3;
    std::vector<double> cap; // discretized sigma_2 upper bound on mu2's grid
    double X1 = 0.0, Y2 = 0.0, X3 = 0.0;
};

namespace grid_detail {

// smallest X with V1(X) - 2 log X > min V1 + margin
inline double confinement_radius(const ModelParams& p, double margin = 20.0) {
    double vmin = field_V1(0.0, p);
    double x_at = 0.0;
    for (int i = 1; i <= 4000; ++i) {
        const double x = 0.01 * i * std::max(1.0, p.tau * p.tau);
        const double v = field_V1(x, p);
        if (v < vmin) {
            vmin = v;
            x_at = x;
        }
    }
    double X = std::max(1.0, x_at);
    while (field_V1(X, p) - 2.0 * std::log(X) <= vmin + margin) X *= 1.05;
    return X;
}

// uniform symmetric grid of n cells on [-X, X]
inline GridMeasure uniform_grid(Axis axis, double X, int n) {
    GridMeasure g;
    g.axis = axis;
    const double h = 2.0 * X / n;
    g.nodes.resize(n);
    g.cell_widths.assign(n, h);
    g.weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) g.nodes[i] = -X + h * (i + 0.5);
    for (int i = 0; i < n / 2; ++i) g.nodes[n - 1 - i] = -g.nodes[i]; // exact mirror
    return g;
}

// symmetric grid: uniform core on [-L, L] plus geometric tail cells to R
inline GridMeasure graded_grid(Axis axis, double L, double R, int n_total) {
    int n_core = static_cast<int>(std::round(0.8 * n_total));
    n_core -= n_core % 2;
    int n_tail = (n_total - n_core) / 2;
    if (n_tail < 8) {
        n_tail = 8;
        n_core = n_total - 2 * n_tail;
        n_core -= n_core % 2;
    }
    const double h = 2.0 * L / n_core;

    // growth ratio g so that the tail cells sum to R - L
    const double target = (R - L) / h;
    double lo = 1.0001, hi = 4.0;
    auto reach = [&](double g) {
        double s = 0.0, w = 1.0;
        for (int k = 0; k < n_tail; ++k) {
            w *= g;
            s += w;
        }
        return s;
    };
    if (reach(hi) < target) throw ConfigError("graded_grid: tail budget cannot reach truncation");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reach(mid) < target ? lo : hi) = mid;
    }
    const double g = 0.5 * (lo + hi);

    std::vector<double> pos_nodes, pos_widths;
    for (int i = 0; i < n_core / 2; ++i) {
        pos_nodes.push_back(h * (i + 0.5));
        pos_widths.push_back(h);
    }
    double edge = L, w = h;
    for (int k = 0; k < n_tail; ++k) {
        w *= g;
        pos_nodes.push_back(edge + 0.5 * w);
        pos_widths.push_back(w);
        edge += w;
    }

    GridMeasure out;
    out.axis = axis;
    const int n = 2 * static_cast<int>(pos_nodes.size());
    out.nodes.resize(n);
    out.cell_widths.resize(n);
    out.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < pos_nodes.size(); ++i) {
        out.nodes[n / 2 + i] = pos_nodes[i];
        out.cell_widths[n / 2 + i] = pos_widths[i];
        out.nodes[n / 2 - 1 - i] = -pos_nodes[i];
        out.cell_widths[n / 2 - 1 - i] = pos_widths[i];
    }
    return out;
}

} // namespace grid_detail

/// Builds the three symmetric grids and the discretized constraint cap.
/// The mu2/mu3 tails extend to where a t^{-5/3} density with unit prefactor
/// leaves less than tail_tol of mass outside (re-checked after the solve).
inline Grids build_grids(const ModelParams& params, const GridConfig& config) {
    config.validate();
    params.validate();
    Grids g;
    g.X1 = config.X1 > 0.0 ? config.X1 : grid_detail::confinement_radius(params);

    const auto ca = critical_abscissae(params);
    const double sqrt3 = std::sqrt(3.0);
    // two-sided tail mass of (sqrt3/2pi) t^{-5/3} beyond R is (3 sqrt3 / 2pi) R^{-2/3}
    const double R_tail = std::pow(3.0 * sqrt3 / (2.0 * M_PI) / config.tail_tol, 1.5);
    const double L2 = std::max({2.0 * ca.y_star + 1.0, g.X1, 2.0});
    const double L3 = std::max({2.0 * ca.x_star + 1.0, g.X1, 2.0});
    g.Y2 = std::max(config.Y2 > 0.0 ? config.Y2 : R_tail, 4.0 * L2);
    g.X3 = std::max(config.X3 > 0.0 ? config.X3 : R_tail, 4.0 * L3);

    g.mu1 = grid_detail::uniform_grid(Axis::real, g.X1, config.n1);
    g.mu2 = grid_detail::graded_grid(Axis::imaginary, L2, g.Y2, config.n2);
    g.mu3 = grid_detail::graded_grid(Axis::real, L3, g.X3, config.n3);

    g.cap.resize(g.mu2.size());
    for (std::size_t i = 0; i < g.mu2.size(); ++i)
        g.cap[i] = sigma2_density(g.mu2.nodes[i], params) * g.mu2.cell_widths[i];

    const double cap_mass = std::accumulate(g.cap.begin(), g.cap.end(), 0.0);
    if (cap_mass < 2.0 / 3.0 * (1.0 + 1e-9))
        throw ConfigError("build_grids: constraint cap mass below 2/3, nu2 infeasible");
    return g;
}

} // namespace veq
