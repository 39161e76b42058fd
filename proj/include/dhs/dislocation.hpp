// Periodic multi-slip dislocation-density transport: paired +-b slip
// systems expand the half matrices into the antisymmetric block structure,
// the velocity picks up a nonlocal mean-field term, and the delta-rescaling
// experiment probes the non-periodic limit where that term vanishes.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dhs/estimates.hpp"
#include "dhs/solver.hpp"

namespace dhs {

using Matrix = std::vector<std::vector<double>>;

struct DislocationSpec {
    std::size_t n_slip = 1;  // N; the system has M = 2N components
    Matrix a_half;           // N x N symmetric
    Matrix q_half;           // N x N symmetric
    double period = 1.0;
};

namespace detail {

inline void require_symmetric(const Matrix& m, std::size_t n, const char* name) {
    if (m.size() != n) throw std::invalid_argument(std::string(name) + ": wrong size");
    for (const auto& row : m)
        if (row.size() != n) throw std::invalid_argument(std::string(name) + ": not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (m[i][j] != m[j][i])
                throw std::invalid_argument(std::string(name) + ": must be symmetric");
}

inline Matrix expand_block(const Matrix& half, std::size_t n) {
    Matrix full(2 * n, std::vector<double>(2 * n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            full[i][j] = half[i][j];
            full[i][j + n] = -half[i][j];
            full[i + n][j] = -half[i][j];
            full[i + n][j + n] = half[i][j];
        }
    return full;
}

}  // namespace detail

/// Expands the N x N half matrices into the M x M block form
/// [[a, -a], [-a, a]] obeying A_{i+N,j} = -A_{i,j} = A_{i,j+N} exactly.
inline std::pair<Matrix, Matrix> expand_matrices(const DislocationSpec& spec) {
    if (spec.n_slip < 1) throw std::invalid_argument("expand_matrices: requires n_slip >= 1");
    detail::require_symmetric(spec.a_half, spec.n_slip, "a_half");
    detail::require_symmetric(spec.q_half, spec.n_slip, "q_half");
    return {detail::expand_block(spec.a_half, spec.n_slip),
            detail::expand_block(spec.q_half, spec.n_slip)};
}

/// Pointwise A u plus the constant-in-x vector Q (integral of u over the
/// period), for plain periodic fields.
inline FieldSet nonlocal_velocity(const FieldSet& u, const Matrix& a, const Matrix& q,
                                  const Grid1D& g) {
    if (g.topology != Topology::periodic)
        throw std::invalid_argument("nonlocal_velocity: requires a periodic grid");
    const std::size_t m = u.m();
    if (a.size() != m || q.size() != m)
        throw std::invalid_argument("nonlocal_velocity: matrix dimension mismatch");
    std::vector<double> integral(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) integral[i] = quad_trapezoid(u.comp[i], g);
    FieldSet v = make_fields(g, m);
    for (std::size_t i = 0; i < m; ++i) {
        double qi = 0.0;  // constant in x
        for (std::size_t k = 0; k < m; ++k) qi += q[i][k] * integral[k];
        for (std::size_t j = 0; j < g.node_count(); ++j) {
            double s = qi;
            for (std::size_t k = 0; k < m; ++k) s += a[i][k] * u.comp[k][j];
            v.comp[i][j] = s;
        }
    }
    return v;
}

/// Builds the solver configuration for one periodic dislocation run with
/// periodic-plus-linear data u^k(x) = l^k x + (periodic part). The
/// admissible box for velocity evaluation covers the total values; the
/// monitored box is the periodic part's data range widened by +-1.
inline RunConfig make_periodic_run_config(const DislocationSpec& spec,
                                          const std::vector<MonotoneProfile>& profiles,
                                          std::span<const double> slopes, const Grid1D& grid,
                                          double eps, double t_end, double cfl = 0.4,
                                          std::size_t monitor_every = 1,
                                          double mollify_eps = 0.0) {
    const std::size_t m = 2 * spec.n_slip;
    if (profiles.size() != m || slopes.size() != m)
        throw std::invalid_argument("run_periodic: needs 2 n_slip profiles and slopes");
    if (grid.topology != Topology::periodic)
        throw std::invalid_argument("run_periodic: requires a periodic grid");
    if (std::abs(grid.length() - spec.period) > 1e-12 * std::max(1.0, spec.period))
        throw std::invalid_argument("run_periodic: grid length must equal the period");
    for (double l : slopes)
        if (l < 0.0) throw std::invalid_argument("run_periodic: slopes must be >= 0");

    auto [a_full, q_full] = expand_matrices(spec);

    // Data-derived boxes: total values for velocity evaluation, periodic
    // part +-1 for monitoring.
    BoxU total_box, p_box;
    total_box.lo.resize(m);
    total_box.hi.resize(m);
    p_box.lo.resize(m);
    p_box.hi.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double tmin = 0.0, tmax = 0.0, pmin = 0.0, pmax = 0.0;
        bool first = true;
        for (std::size_t j = 0; j < grid.node_count(); ++j) {
            const double x = grid.node(j);
            const double tot = profile_value(profiles[i], x);
            const double p = tot - slopes[i] * x;
            if (first) {
                tmin = tmax = tot;
                pmin = pmax = p;
                first = false;
            } else {
                tmin = std::min(tmin, tot);
                tmax = std::max(tmax, tot);
                pmin = std::min(pmin, p);
                pmax = std::max(pmax, p);
            }
        }
        total_box.lo[i] = tmin - 1.0;
        total_box.hi[i] = tmax + 1.0;
        p_box.lo[i] = pmin - 1.0;
        p_box.hi[i] = pmax + 1.0;
    }

    RunConfig cfg;
    cfg.system = linear(a_full, total_box);
    cfg.system.nonlocal = NonlocalTerm{q_full, 1.0};
    cfg.profiles = profiles;
    cfg.grid = grid;
    cfg.eps = eps;
    cfg.t_end = t_end;
    cfg.cfl = cfl;
    cfg.mollify_eps = mollify_eps;
    cfg.monitor_every = monitor_every;
    cfg.seam_rise.assign(slopes.begin(), slopes.end());
    for (double& r : cfg.seam_rise) r *= spec.period;
    cfg.monitor_box = p_box;
    return cfg;
}

/// Evolves the gradient-periodic representation and records all monitors.
/// The period-mean of each gradient is conserved (= l^k) by the seam
/// telescoping; measure it with gradient_mean_drift.
inline RunResult run_periodic(const DislocationSpec& spec,
                              const std::vector<MonotoneProfile>& profiles,
                              std::span<const double> slopes, const Grid1D& grid, double eps,
                              double t_end, double cfl = 0.4, std::size_t monitor_every = 1,
                              double mollify_eps = 0.0) {
    return run(make_periodic_run_config(spec, profiles, slopes, grid, eps, t_end, cfl,
                                        monitor_every, mollify_eps));
}

/// Max over records and components of |mean(w^k) - l^k|, using the recorded
/// L1 gradient mass per period.
inline double gradient_mean_drift(const RunResult& res, std::span<const double> slopes,
                                  double period) {
    double drift = 0.0;
    for (const auto& rec : res.monitors)
        for (std::size_t i = 0; i < slopes.size(); ++i)
            drift = std::max(drift, std::abs(rec.l1grad[i] / period - slopes[i]));
    return drift;
}

struct RescaleRow {
    double delta = 0.0;
    double nonlocal_sup = 0.0;  // max |delta-scaled nonlocal term| over the run
    double distance = 0.0;      // weighted L2 distance to the purely local run
};

struct RescaleOptions {
    std::size_t nodes_per_unit = 64;
    double t_end = 0.4;
    double cfl = 0.4;
    double eps = 0.0;
    double mollify_eps = 0.0;
};

/// For each delta, runs the model with the delta-scaled nonlocal term on a
/// line domain of width 1/delta and reports the measured magnitude of that
/// term and the weighted L2 distance of the final state to the purely local
/// run on the same grid. Both columns decrease as delta does.
inline std::vector<RescaleRow> rescale_experiment(const DislocationSpec& spec,
                                                  const std::vector<MonotoneProfile>& base_profiles,
                                                  std::span<const double> deltas,
                                                  const RescaleOptions& opts = {}) {
    const std::size_t m = 2 * spec.n_slip;
    if (base_profiles.size() != m)
        throw std::invalid_argument("rescale_experiment: needs 2 n_slip profiles");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw std::invalid_argument("rescale_experiment: deltas must be > 0");
        if (k > 0 && !(deltas[k] < deltas[k - 1]))
            throw std::invalid_argument("rescale_experiment: deltas must decrease");
    }
    auto [a_full, q_full] = expand_matrices(spec);

    BoxU box;
    box.lo.resize(m);
    box.hi.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        validate_profile(base_profiles[i]);
        const double lo = profile_value(base_profiles[i], -1e12);
        const double hi = profile_value(base_profiles[i], 1e12);
        box.lo[i] = std::min(lo, hi) - 1.0;
        box.hi[i] = std::max(lo, hi) + 1.0;
    }

    std::vector<RescaleRow> rows;
    for (double delta : deltas) {
        const double width = 1.0 / delta;
        const std::size_t n =
            std::max<std::size_t>(16, static_cast<std::size_t>(std::llround(width * static_cast<double>(opts.nodes_per_unit))));
        const Grid1D g = make_grid(-0.5 * width, 0.5 * width, n, Topology::line);

        RunConfig cfg;
        cfg.system = linear(a_full, box);
        cfg.system.nonlocal = NonlocalTerm{q_full, delta};
        cfg.profiles = base_profiles;
        cfg.grid = g;
        cfg.eps = opts.eps;
        cfg.t_end = opts.t_end;
        cfg.cfl = opts.cfl;
        cfg.mollify_eps = opts.mollify_eps;
        RunOptions light;
        light.record_monitors = false;
        light.keep_snapshots = false;
        const RunResult scaled = run(cfg, light);

        RunConfig local_cfg = cfg;
        local_cfg.system = linear(a_full, box);  // no nonlocal term
        const RunResult local = run(local_cfg, light);

        RescaleRow row;
        row.delta = delta;
        row.nonlocal_sup = scaled.nonlocal_sup;
        row.distance = weighted_l2_distance(scaled.final_state, local.final_state);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dhs
