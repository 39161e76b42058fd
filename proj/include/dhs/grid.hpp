// Uniform 1D grids, sampled fields, one-sided gradients, and quadrature.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhs {

enum class Topology { line, periodic };

/// Absolute tolerance below which a negative forward increment is treated as
/// rounding noise rather than a monotonicity violation.
inline constexpr double kTolMono = 1e-12;

/// Uniform mesh of n cells on [x_min, x_max]. Line grids store both
/// endpoints (n+1 nodes); periodic grids omit the right endpoint (n nodes).
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n = 2;
    Topology topology = Topology::line;
    double dx = 0.5;

    std::size_t node_count() const {
        return topology == Topology::line ? n + 1 : n;
    }
    double node(std::size_t j) const { return x_min + static_cast<double>(j) * dx; }
    double length() const { return x_max - x_min; }

    bool operator==(const Grid1D&) const = default;
};

inline Grid1D make_grid(double x_min, double x_max, std::size_t n, Topology topology) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max))
        throw std::invalid_argument("make_grid: bounds must be finite");
    if (!(x_min < x_max))
        throw std::invalid_argument("make_grid: requires x_min < x_max");
    if (n < 2)
        throw std::invalid_argument("make_grid: requires n >= 2");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.topology = topology;
    g.dx = (x_max - x_min) / static_cast<double>(n);
    return g;
}

/// m scalar components sampled on the nodes of one grid.
struct FieldSet {
    Grid1D grid;
    std::vector<std::vector<double>> comp;  // comp[i][j], i < m, j < node_count

    std::size_t m() const { return comp.size(); }
};

inline FieldSet make_fields(const Grid1D& g, std::size_t m, double fill = 0.0) {
    FieldSet f;
    f.grid = g;
    f.comp.assign(m, std::vector<double>(g.node_count(), fill));
    return f;
}

inline void require_finite(const FieldSet& f, const std::string& what) {
    for (const auto& c : f.comp)
        for (double v : c)
            if (!std::isfinite(v))
                throw std::runtime_error(what + ": non-finite sample");
}

/// One-sided forward differences w_j = (u_{j+1} - u_j)/dx, one entry per node.
/// Line grids copy the last interior value into the final node; periodic
/// grids wrap the index.
struct GradientSet {
    Grid1D grid;
    std::vector<std::vector<double>> comp;

    std::size_t m() const { return comp.size(); }
};

/// Forward gradient with an optional value jump across the periodic seam
/// (used for data that is periodic up to a fixed linear rise per period).
inline GradientSet forward_gradient(const FieldSet& f, std::span<const double> seam_rise = {}) {
    if (!seam_rise.empty() && seam_rise.size() != f.m())
        throw std::invalid_argument("forward_gradient: seam_rise size mismatch");
    GradientSet w;
    w.grid = f.grid;
    w.comp.assign(f.m(), std::vector<double>(f.grid.node_count(), 0.0));
    const double inv_dx = 1.0 / f.grid.dx;
    const std::size_t nn = f.grid.node_count();
    for (std::size_t i = 0; i < f.m(); ++i) {
        const auto& u = f.comp[i];
        auto& wi = w.comp[i];
        if (f.grid.topology == Topology::line) {
            for (std::size_t j = 0; j + 1 < nn; ++j)
                wi[j] = (u[j + 1] - u[j]) * inv_dx;
            if (nn >= 2) wi[nn - 1] = wi[nn - 2];
        } else {
            const double rise = seam_rise.empty() ? 0.0 : seam_rise[i];
            for (std::size_t j = 0; j + 1 < nn; ++j)
                wi[j] = (u[j + 1] - u[j]) * inv_dx;
            wi[nn - 1] = (u[0] + rise - u[nn - 1]) * inv_dx;
        }
    }
    return w;
}

/// Trapezoid rule on line grids; rectangle rule (total length n*dx) on
/// periodic grids.
inline double quad_trapezoid(std::span<const double> samples, const Grid1D& g) {
    if (samples.size() != g.node_count())
        throw std::invalid_argument("quad_trapezoid: sample count does not match grid");
    double s = 0.0;
    if (g.topology == Topology::line) {
        s += 0.5 * (samples.front() + samples.back());
        for (std::size_t j = 1; j + 1 < samples.size(); ++j) s += samples[j];
    } else {
        for (double v : samples) s += v;
    }
    return s * g.dx;
}

/// L1 norm of the per-cell increments: sum over cells of |u_{j+1} - u_j|
/// (seam-adjusted on periodic grids). Telescopes exactly to the total rise
/// for monotone data.
inline double l1_cell_increments(const std::vector<double>& u, const Grid1D& g, double seam_rise = 0.0) {
    double s = 0.0;
    const std::size_t nn = g.node_count();
    if (g.topology == Topology::line) {
        for (std::size_t j = 0; j + 1 < nn; ++j) s += std::abs(u[j + 1] - u[j]);
    } else {
        for (std::size_t j = 0; j + 1 < nn; ++j) s += std::abs(u[j + 1] - u[j]);
        s += std::abs(u[0] + seam_rise - u[nn - 1]);
    }
    return s;
}

}  // namespace dhs
