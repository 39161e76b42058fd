// Explicit time integration of the viscous regularization: first-order
// upwind advection plus explicit diffusion under a CFL-limited Euler step.
// The scheme is monotone, so ordered data stays ordered and the discrete
// range never grows; the monitors record every estimate the run is expected
// to satisfy.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhs/estimates.hpp"
#include "dhs/grid.hpp"
#include "dhs/initial_data.hpp"
#include "dhs/system.hpp"

namespace dhs {

/// One complete experiment.
struct RunConfig {
    SystemSpec system;
    std::vector<MonotoneProfile> profiles;
    Grid1D grid;
    double eps = 0.0;          // viscosity
    double t_end = 1.0;
    double cfl = 0.4;          // safety factor in (0,1)
    double mollify_eps = 0.0;  // 0 disables data mollification
    std::size_t monitor_every = 1;
    std::size_t max_snapshots = 64;
    // Periodic-plus-linear data: value jump l_i * period across the seam.
    std::vector<double> seam_rise;
    // Box used for excursion monitoring; defaults to system.box. Seam runs
    // monitor the periodic part u - l x against this box.
    std::optional<BoxU> monitor_box;
};

struct SolverState {
    double t = 0.0;
    FieldSet u;
    long step_index = 0;
    std::vector<double> ghost_lo;  // frozen initial boundary values (line grids)
    std::vector<double> ghost_hi;
    std::vector<double> seam_rise;
    double excursion_running = 0.0;    // max eval-time box excursion since last reset
    double nonlocal_sup_running = 0.0; // max |shift| seen so far

    // reusable step buffers
    std::vector<double> vel;   // m * node_count
    std::vector<double> next;  // node_count
};

namespace detail {

/// Integral of each component over the domain. On periodic grids the linear
/// part (seam rise) is integrated exactly and the periodic remainder by the
/// rectangle rule.
inline std::vector<double> component_integrals(const FieldSet& u, std::span<const double> seam_rise) {
    const Grid1D& g = u.grid;
    std::vector<double> integral(u.m(), 0.0);
    for (std::size_t i = 0; i < u.m(); ++i) {
        if (g.topology == Topology::line) {
            integral[i] = quad_trapezoid(u.comp[i], g);
        } else {
            const double l = seam_rise.empty() ? 0.0 : seam_rise[i] / g.length();
            double s = 0.0;
            for (std::size_t j = 0; j < g.node_count(); ++j)
                s += u.comp[i][j] - l * g.node(j);
            integral[i] = s * g.dx + 0.5 * l * (g.x_max * g.x_max - g.x_min * g.x_min);
        }
    }
    return integral;
}

inline std::vector<double> nonlocal_shift(const FieldSet& u, const SystemSpec& spec,
                                          std::span<const double> seam_rise) {
    std::vector<double> shift(spec.m, 0.0);
    if (!spec.nonlocal) return shift;
    const auto integral = component_integrals(u, seam_rise);
    for (std::size_t i = 0; i < spec.m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < spec.m; ++j) s += spec.nonlocal->q[i][j] * integral[j];
        shift[i] = spec.nonlocal->scale * s;
    }
    return shift;
}

/// Fills state.vel with a^i(u_j) + shift_i (box-clamped evaluation, the
/// excursion is recorded) and returns max |vel|.
inline double fill_velocities(SolverState& st, const SystemSpec& spec) {
    const Grid1D& g = st.u.grid;
    const std::size_t nn = g.node_count();
    st.vel.resize(spec.m * nn);
    const std::vector<double> shift = nonlocal_shift(st.u, spec, st.seam_rise);
    for (double sh : shift)
        st.nonlocal_sup_running = std::max(st.nonlocal_sup_running, std::abs(sh));
    std::vector<double> pt(spec.m), a(spec.m);
    double a_max = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
        for (std::size_t i = 0; i < spec.m; ++i) pt[i] = st.u.comp[i][j];
        st.excursion_running = std::max(st.excursion_running, spec.box.excursion(pt));
        for (std::size_t i = 0; i < spec.m; ++i) pt[i] = spec.box.clamp(i, pt[i]);
        spec.velocity(pt, a);
        for (std::size_t i = 0; i < spec.m; ++i) {
            const double v = a[i] + shift[i];
            st.vel[i * nn + j] = v;
            a_max = std::max(a_max, std::abs(v));
        }
    }
    return a_max;
}

}  // namespace detail

/// dt = cfl * min(dx / max(a_max, 1e-14), dx^2 / max(2 eps, 1e-14)), where
/// a_max is taken over nodes and components at the current state (including
/// any nonlocal shift).
inline double stable_dt(SolverState& state, const SystemSpec& spec, double eps, double cfl) {
    const double a_max = detail::fill_velocities(state, spec);
    const double dx = state.u.grid.dx;
    const double adv = dx / std::max(a_max, 1e-14);
    const double diff = dx * dx / std::max(2.0 * eps, 1e-14);
    return cfl * std::min(adv, diff);
}

/// One explicit Euler update. Upwind advective differences per the sign of
/// the velocity at the node, plus explicit diffusion. Line boundaries read
/// ghost nodes frozen at the initial boundary values; periodic boundaries
/// wrap (with the seam rise added for periodic-plus-linear data).
inline void step(SolverState& st, const SystemSpec& spec, double eps, double dt) {
    const Grid1D& g = st.u.grid;
    const std::size_t nn = g.node_count();
    const double dx = g.dx;
    const double a_max = detail::fill_velocities(st, spec);
    const double mu = eps * dt / (dx * dx);
    // Convex-combination precondition; guarantees the discrete max principle.
    if (a_max * dt / dx + 2.0 * mu > 1.0 + 1e-12) {
        std::ostringstream oss;
        oss << "step: CFL violation (|a|max dt/dx + 2 eps dt/dx^2 = "
            << a_max * dt / dx + 2.0 * mu << " > 1) at t=" << st.t;
        throw std::runtime_error(oss.str());
    }
    st.next.resize(nn);
    for (std::size_t i = 0; i < spec.m; ++i) {
        auto& u = st.u.comp[i];
        const double* vel = st.vel.data() + i * nn;
        const double rise = st.seam_rise.empty() ? 0.0 : st.seam_rise[i];
        for (std::size_t j = 0; j < nn; ++j) {
            double ul, ur;
            if (g.topology == Topology::line) {
                ul = j == 0 ? st.ghost_lo[i] : u[j - 1];
                ur = j + 1 == nn ? st.ghost_hi[i] : u[j + 1];
            } else {
                ul = j == 0 ? u[nn - 1] - rise : u[j - 1];
                ur = j + 1 == nn ? u[0] + rise : u[j + 1];
            }
            const double v = vel[j];
            const double dupw = v >= 0.0 ? (u[j] - ul) / dx : (ur - u[j]) / dx;
            const double lap = (ur - 2.0 * u[j] + ul) / (dx * dx);
            const double un = u[j] - dt * v * dupw + dt * eps * lap;
            if (!std::isfinite(un)) {
                std::ostringstream oss;
                oss << "step: non-finite value at t=" << st.t << " step=" << st.step_index
                    << " component=" << i << " node=" << j;
                throw std::runtime_error(oss.str());
            }
            st.next[j] = un;
        }
        std::swap(u, st.next);
    }
    st.t += dt;
    ++st.step_index;
}

struct RunOptions {
    bool record_monitors = true;
    bool keep_snapshots = true;
};

struct RunResult {
    Grid1D grid;
    std::size_t m = 0;
    FieldSet initial;  // state at t = 0 after sampling and mollification
    FieldSet final_state;
    std::vector<MonitorReport> monitors;
    std::vector<Snapshot> snapshots;
    std::vector<std::string> warnings;
    std::vector<double> u0_linf;  // per component at t = 0 (periodic part for seam runs)
    double entropy_tv0 = 0.0;     // TV of the entropy density at t = 0
    double nonlocal_sup = 0.0;    // max |nonlocal shift| over the run
    long total_steps = 0;
};

namespace detail {

inline std::vector<double> component_linf(const FieldSet& u, std::span<const double> seam_rise) {
    const Grid1D& g = u.grid;
    std::vector<double> linf(u.m(), 0.0);
    for (std::size_t i = 0; i < u.m(); ++i) {
        const double l = seam_rise.empty() ? 0.0 : seam_rise[i] / g.length();
        for (std::size_t j = 0; j < g.node_count(); ++j)
            linf[i] = std::max(linf[i], std::abs(u.comp[i][j] - l * g.node(j)));
    }
    return linf;
}

inline MonitorReport make_monitor(SolverState& st, const SystemSpec& spec, const BoxU& mbox,
                                  const MonitorReport* prev) {
    const Grid1D& g = st.u.grid;
    MonitorReport rep;
    rep.t = st.t;
    rep.linf = component_linf(st.u, st.seam_rise);
    const GradientSet w = forward_gradient(st.u, st.seam_rise);
    rep.l1grad.resize(st.u.m());
    for (std::size_t i = 0; i < st.u.m(); ++i) {
        const double rise = st.seam_rise.empty() ? 0.0 : st.seam_rise[i];
        rep.l1grad[i] = l1_cell_increments(st.u.comp[i], g, rise);
    }
    rep.entropy_n = detail::gradient_entropy_nonneg(w, g);
    rep.dissipation_d = dissipation(st.u, w, spec);
    rep.cum_dissipation =
        prev ? prev->cum_dissipation +
                   0.5 * (prev->dissipation_d + rep.dissipation_d) * (rep.t - prev->t)
             : 0.0;
    rep.gradsum_sup = gradsum_sup(w);
    rep.mono_min = check_monotone(st.u, st.seam_rise);
    // Excursion of the monitored quantity (periodic part for seam runs),
    // folded with any eval-time overshoot seen inside the step loop.
    double exc = 0.0;
    std::vector<double> pt(st.u.m());
    for (std::size_t j = 0; j < g.node_count(); ++j) {
        for (std::size_t i = 0; i < st.u.m(); ++i) {
            const double l = st.seam_rise.empty() ? 0.0 : st.seam_rise[i] / g.length();
            pt[i] = st.u.comp[i][j] - l * g.node(j);
        }
        exc = std::max(exc, mbox.excursion(pt));
    }
    rep.box_excursion = st.seam_rise.empty() ? std::max(exc, st.excursion_running) : exc;
    st.excursion_running = 0.0;
    return rep;
}

inline double entropy_density_tv(const GradientSet& w, const Grid1D& g) {
    std::vector<double> density(g.node_count(), 0.0);
    for (std::size_t i = 0; i < w.m(); ++i)
        for (std::size_t j = 0; j < g.node_count(); ++j)
            density[j] += entropy_f(std::max(0.0, w.comp[i][j]));
    double tv = 0.0;
    for (std::size_t j = 0; j + 1 < density.size(); ++j) tv += std::abs(density[j + 1] - density[j]);
    return tv;
}

inline void validate_run_config(const RunConfig& cfg) {
    if (cfg.system.m != cfg.profiles.size())
        throw std::invalid_argument("run: one profile per component required");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end))
        throw std::invalid_argument("run: requires finite t_end > 0");
    if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0))
        throw std::invalid_argument("run: requires cfl in (0,1)");
    if (cfg.eps < 0.0 || !std::isfinite(cfg.eps))
        throw std::invalid_argument("run: requires finite eps >= 0");
    if (cfg.mollify_eps < 0.0) throw std::invalid_argument("run: requires mollify_eps >= 0");
    if (cfg.monitor_every < 1) throw std::invalid_argument("run: requires monitor_every >= 1");
    if (!cfg.seam_rise.empty()) {
        if (cfg.grid.topology != Topology::periodic)
            throw std::invalid_argument("run: seam rise requires a periodic grid");
        if (cfg.seam_rise.size() != cfg.system.m)
            throw std::invalid_argument("run: seam_rise size mismatch");
        for (double r : cfg.seam_rise)
            if (r < 0.0 || !std::isfinite(r))
                throw std::invalid_argument("run: seam rise must be finite and >= 0");
    }
}

}  // namespace detail

/// Samples the profiles, mollifies, and steps to t_end with stable_dt,
/// recording monitors every monitor_every steps. Deterministic: identical
/// config gives bit-identical output.
inline RunResult run(const RunConfig& cfg, const RunOptions& opts = {}) {
    detail::validate_run_config(cfg);
    const Grid1D& g = cfg.grid;
    const SystemSpec& spec = cfg.system;
    RunResult res;
    res.grid = g;
    res.m = spec.m;

    FieldSet u0 = sample_profile(cfg.profiles, g, &spec.box);

    if (!cfg.seam_rise.empty()) {
        for (std::size_t i = 0; i < spec.m; ++i) {
            const double end_val = profile_value(cfg.profiles[i], g.x_max);
            const double start_val = profile_value(cfg.profiles[i], g.x_min);
            const double gap = std::abs(end_val - (start_val + cfg.seam_rise[i]));
            if (gap > 1e-9 * std::max(1.0, std::abs(end_val)))
                throw std::invalid_argument("run: profile inconsistent with seam rise");
        }
    }
    if (check_monotone(u0, cfg.seam_rise) < -kTolMono)
        throw std::invalid_argument("run: initial data is not nondecreasing");

    if (cfg.mollify_eps > 0.0) {
        bool under = false;
        if (cfg.seam_rise.empty()) {
            u0 = mollify(u0, cfg.mollify_eps, &under);
        } else {
            // Mollify the periodic part; the linear part is invariant under
            // the symmetric unit-mass kernel.
            FieldSet p = u0;
            for (std::size_t i = 0; i < spec.m; ++i) {
                const double l = cfg.seam_rise[i] / g.length();
                for (std::size_t j = 0; j < g.node_count(); ++j) p.comp[i][j] -= l * g.node(j);
            }
            p = mollify(p, cfg.mollify_eps, &under);
            for (std::size_t i = 0; i < spec.m; ++i) {
                const double l = cfg.seam_rise[i] / g.length();
                for (std::size_t j = 0; j < g.node_count(); ++j)
                    u0.comp[i][j] = p.comp[i][j] + l * g.node(j);
            }
        }
        if (under)
            res.warnings.push_back("mollify: eps < 2 dx, kernel under-resolved; data passed through");
    }

    SolverState st;
    st.u = u0;
    st.seam_rise = cfg.seam_rise;
    st.ghost_lo.resize(spec.m);
    st.ghost_hi.resize(spec.m);
    for (std::size_t i = 0; i < spec.m; ++i) {
        st.ghost_lo[i] = u0.comp[i].front();
        st.ghost_hi[i] = u0.comp[i].back();
    }

    res.initial = u0;
    res.u0_linf = detail::component_linf(u0, cfg.seam_rise);
    res.entropy_tv0 = detail::entropy_density_tv(forward_gradient(u0, cfg.seam_rise), g);

    // Domain-width warning: the data's transition zone should stay at least
    // 5 M0 t_end away from line boundaries so the frozen ghosts are valid.
    if (g.topology == Topology::line) {
        const GradientSet w0 = forward_gradient(u0);
        double wmax = 0.0;
        for (std::size_t i = 0; i < w0.m(); ++i)
            for (double v : w0.comp[i]) wmax = std::max(wmax, std::abs(v));
        if (wmax > 0.0) {
            const double thr = std::max(1e-12, 1e-6 * wmax);
            std::size_t ja = g.node_count(), jb = 0;
            for (std::size_t i = 0; i < w0.m(); ++i)
                for (std::size_t j = 0; j < g.node_count(); ++j)
                    if (std::abs(w0.comp[i][j]) > thr) {
                        ja = std::min(ja, j);
                        jb = std::max(jb, j);
                    }
            if (ja <= jb) {
                const double need = 5.0 * spec.m0 * cfg.t_end;
                const double margin =
                    std::min(g.node(ja) - g.x_min, g.x_max - g.node(std::min(jb + 1, g.node_count() - 1)));
                if (margin < need) {
                    std::ostringstream oss;
                    oss << "run: transition zone margin " << margin << " is below 5 M0 t_end = "
                        << need << "; boundary ghosts may contaminate the solution";
                    res.warnings.push_back(oss.str());
                }
            }
        }
    }

    const BoxU& mbox = cfg.monitor_box ? *cfg.monitor_box : spec.box;
    if (opts.record_monitors) res.monitors.push_back(detail::make_monitor(st, spec, mbox, nullptr));
    if (opts.keep_snapshots) res.snapshots.push_back({st.t, st.u});

    const double t_stop = cfg.t_end * (1.0 - 1e-14);
    constexpr long kMaxSteps = 50'000'000;
    while (st.t < t_stop) {
        if (st.step_index >= kMaxSteps) throw std::runtime_error("run: step budget exceeded");
        double dt = stable_dt(st, spec, cfg.eps, cfg.cfl);
        dt = std::min(dt, cfg.t_end - st.t);
        step(st, spec, cfg.eps, dt);
        const bool last = st.t >= t_stop;
        if ((st.step_index % static_cast<long>(cfg.monitor_every) == 0) || last) {
            if (opts.record_monitors) {
                const MonitorReport* prev = res.monitors.empty() ? nullptr : &res.monitors.back();
                res.monitors.push_back(detail::make_monitor(st, spec, mbox, prev));
            }
            if (opts.keep_snapshots) res.snapshots.push_back({st.t, st.u});
        }
    }

    res.final_state = st.u;
    res.total_steps = st.step_index;
    res.nonlocal_sup = st.nonlocal_sup_running;

    if (opts.keep_snapshots && cfg.max_snapshots >= 2 && res.snapshots.size() > cfg.max_snapshots) {
        std::vector<Snapshot> thin;
        const std::size_t count = res.snapshots.size();
        const std::size_t keep = cfg.max_snapshots;
        for (std::size_t k = 0; k < keep; ++k) {
            const std::size_t idx = k * (count - 1) / (keep - 1);
            if (thin.empty() || thin.back().t < res.snapshots[idx].t)
                thin.push_back(std::move(res.snapshots[idx]));
        }
        res.snapshots = std::move(thin);
    }
    return res;
}

}  // namespace dhs
