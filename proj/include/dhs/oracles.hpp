// Independent reference solutions: the rarefaction solution of the scalar
// convex equation on monotone Riemann data, the method-of-characteristics
// solution for scalar equations, and jointly refined self-reference runs.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dhs/solver.hpp"

namespace dhs {

/// Rarefaction solution of u_t + u u_x = 0 for step data uL -> uR (uL <= uR):
/// uL left of the fan, x/t inside, uR right of it.
inline double burgers_riemann(double u_left, double u_right, double t, double x) {
    if (u_left > u_right)
        throw std::invalid_argument("burgers_riemann: requires uL <= uR (no shocks)");
    if (!(t > 0.0)) throw std::invalid_argument("burgers_riemann: requires t > 0");
    if (x <= u_left * t) return u_left;
    if (x >= u_right * t) return u_right;
    return x / t;
}

/// Scalar solution by characteristics: solves y + t a(u0(y)) = x for the
/// foot point by bisection (the map is nondecreasing for nondecreasing u0
/// and a nondecreasing on the data range), then returns u0(y). If u0 jumps
/// across the foot point, the value is completed through the jump by
/// inverting a(u) t + y = x over the jump interval, which realizes the
/// implicit solution u = u0(x - a(u) t) on the completed monotone graph.
inline double characteristics_scalar(const std::function<double(double)>& a,
                                     const std::function<double(double)>& u0, double t, double x) {
    if (t < 0.0) throw std::invalid_argument("characteristics_scalar: requires t >= 0");
    if (t == 0.0) return u0(x);
    const auto g = [&](double y) { return y + t * a(u0(y)) - x; };

    double lo = x, hi = x, span = std::max(1.0, std::abs(x));
    int grow = 0;
    for (; grow < 200 && g(lo) > 0.0; ++grow, span *= 2.0) lo = x - span;
    for (span = std::max(1.0, std::abs(x)); grow < 400 && g(hi) < 0.0; ++grow, span *= 2.0)
        hi = x + span;
    if (g(lo) > 0.0 || g(hi) < 0.0)
        throw std::runtime_error(
            "characteristics_scalar: bracket failure (monotonicity assumptions violated?)");
    for (int k = 0; k < 200 && (hi - lo) > 1e-12; ++k) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    const double y = 0.5 * (lo + hi);

    const double h = 1e-9 * std::max(1.0, std::abs(y));
    const double um = u0(y - h), up = u0(y + h);
    if (up - um <= 1e-9 * std::max(1.0, std::abs(up) + std::abs(um))) return u0(y);

    // Data jump at the foot point: pick the fan value with a(u) t + y = x.
    const double target = (x - y) / t;
    double ulo = um, uhi = up;
    if (a(ulo) >= target) return ulo;
    if (a(uhi) <= target) return uhi;
    for (int k = 0; k < 200 && (uhi - ulo) > 1e-13 * std::max(1.0, std::abs(uhi)); ++k) {
        const double mid = 0.5 * (ulo + uhi);
        (a(mid) <= target ? ulo : uhi) = mid;
    }
    return 0.5 * (ulo + uhi);
}

/// Reruns the config with refine times as many cells and eps/refine (joint
/// refinement along the vanishing-viscosity path), restricted back to the
/// coarse nodes by exact index stride.
inline FieldSet fine_reference(const RunConfig& config, std::size_t refine) {
    if (refine < 2) throw std::invalid_argument("fine_reference: requires refine >= 2");
    RunConfig fine = config;
    fine.grid = make_grid(config.grid.x_min, config.grid.x_max, config.grid.n * refine,
                          config.grid.topology);
    fine.eps = config.eps / static_cast<double>(refine);
    RunOptions opts;
    opts.record_monitors = false;
    opts.keep_snapshots = false;
    const RunResult res = run(fine, opts);

    FieldSet coarse = make_fields(config.grid, config.system.m);
    for (std::size_t i = 0; i < coarse.m(); ++i)
        for (std::size_t j = 0; j < config.grid.node_count(); ++j)
            coarse.comp[i][j] = res.final_state.comp[i][j * refine];
    return coarse;
}

}  // namespace dhs
