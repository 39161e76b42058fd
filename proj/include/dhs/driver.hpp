// Command-level orchestration shared by the CLI and the test suites:
// config-driven runs, the invariant verification suite, convergence studies
// against the oracles, and the rescale experiment.
#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dhs/config_io.hpp"
#include "dhs/csv_io.hpp"
#include "dhs/dislocation.hpp"
#include "dhs/oracles.hpp"
#include "dhs/solver.hpp"

namespace dhs {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  // measured worst-case slack (sign convention per check)
    std::string detail;
};

namespace drvdetail {

inline std::optional<Matrix> system_matrix(const ConfigFile& c) {
    if (c.system.kind == "linear") return c.system.a;
    if (c.system.kind == "dislocation")
        return expand_matrices(dislocation_spec_from(c)).first;
    return std::nullopt;
}

}  // namespace drvdetail

/// The full invariant suite over one finished run: max principle,
/// monotonicity, L1 gradient bound, entropy budget, cone-copositivity
/// sampling, dissipation sign, and (for all-off-diagonal-nonpositive linear
/// systems) the gradient-sum bound.
inline std::vector<CheckResult> run_invariant_checks(const RunResult& res, const RunConfig& rc,
                                                     const std::optional<Matrix>& a_matrix) {
    std::vector<CheckResult> out;
    const bool seam = !rc.seam_rise.empty();
    const auto& mons = res.monitors;
    if (mons.empty()) throw std::invalid_argument("run_invariant_checks: no monitor records");

    {
        CheckResult c;
        c.name = "max_principle";
        if (!seam) {
            double worst = 0.0;
            for (const auto& r : mons)
                for (std::size_t i = 0; i < res.m; ++i)
                    worst = std::max(worst, r.linf[i] - mons.front().linf[i]);
            c.value = worst;
            c.pass = worst <= 1e-12;
            c.detail = "max linf growth over initial";
        } else {
            double worst = 0.0;
            for (const auto& r : mons) worst = std::max(worst, r.box_excursion);
            c.value = worst;
            c.pass = worst <= 1e-12;
            c.detail = "periodic part excursion outside data box +-1";
        }
        out.push_back(c);
    }
    {
        CheckResult c;
        c.name = "monotonicity";
        double lo = 0.0;
        for (const auto& r : mons) lo = std::min(lo, r.mono_min);
        c.value = lo;
        c.pass = lo >= -1e-12;
        c.detail = "min forward increment over all records";
        out.push_back(c);
    }
    {
        CheckResult c;
        c.name = "l1_gradient_bound";
        if (!seam) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& r : mons)
                for (std::size_t i = 0; i < res.m; ++i)
                    worst = std::max(worst, r.l1grad[i] - 2.0 * mons.front().linf[i]);
            c.value = worst;
            c.pass = worst <= 1e-10;
            c.detail = "max l1grad - 2 linf(0)";
        } else {
            double worst = 0.0;
            for (const auto& r : mons)
                for (std::size_t i = 0; i < res.m; ++i)
                    worst = std::max(worst, std::abs(r.l1grad[i] - rc.seam_rise[i]));
            c.value = worst;
            c.pass = worst <= 1e-8;
            c.detail = "gradient mass drift from l period";
        }
        out.push_back(c);
    }
    if (!seam) {
        CheckResult c;
        c.name = "l1_telescoping";
        double worst = 0.0;
        for (const auto& s : res.snapshots)
            for (std::size_t i = 0; i < res.m; ++i) {
                const double l1 = l1_cell_increments(s.state.comp[i], s.state.grid);
                const double rise = s.state.comp[i].back() - s.state.comp[i].front();
                worst = std::max(worst, std::abs(l1 - rise));
            }
        c.value = worst;
        c.pass = worst <= 1e-10;
        c.detail = "monotone L1 gradient equals total rise";
        out.push_back(c);
    }
    {
        CheckResult c;
        c.name = "entropy_budget";
        double max_gap = 0.0;
        for (std::size_t k = 1; k < mons.size(); ++k)
            max_gap = std::max(max_gap, mons[k].t - mons[k - 1].t);
        const bool spacing_ok = rc.monitor_every == 1 || max_gap <= rc.t_end / 200.0;
        if (!spacing_ok) {
            c.pass = false;
            c.value = max_gap;
            c.detail = "monitor spacing too coarse for the budget integral (need t_end/200)";
        } else {
            double u0_eff = 0.0;
            if (seam) {
                for (double v : mons.front().l1grad) u0_eff = std::max(u0_eff, 0.5 * v);
            } else {
                for (double v : res.u0_linf) u0_eff = std::max(u0_eff, v);
            }
            const BudgetReport rep =
                entropy_budget(mons, rc.system, u0_eff, res.grid.dx, res.entropy_tv0);
            c.pass = rep.pass;
            c.value = rep.max_violation;
            c.detail = "max N + int D violation; tol " + g17(rep.tol_budget);
        }
        out.push_back(c);
    }
    bool h2_ok = false;
    {
        CheckResult c;
        c.name = "h2_sampling";
        const H2Report rep = check_h2(rc.system, 15, 32);
        c.value = rep.min_quadform;
        c.pass = rep.min_quadform >= -1e-12;
        h2_ok = c.pass;
        c.detail = "min sampled cone quadratic form";
        out.push_back(c);
    }
    if (h2_ok) {
        CheckResult c;
        c.name = "dissipation_sign";
        const double jmax = jacobian_abs_max(rc.system, 9);
        double worst = 0.0;  // most negative D relative to its scale
        bool ok = true;
        for (const auto& r : mons) {
            double mass = 0.0;
            for (double v : r.l1grad) mass += v;
            const double scale = mass * mass * jmax;
            if (r.dissipation_d < -1e-10 * scale) ok = false;
            worst = std::min(worst, r.dissipation_d);
        }
        c.pass = ok;
        c.value = worst;
        c.detail = "min D(t); tolerance -1e-10 x (gradient mass)^2 max|Da|";
        out.push_back(c);
    }
    if (a_matrix && res.m >= 2 && h2_ok) {
        bool offdiag_nonpos = true;
        for (std::size_t i = 0; i < res.m; ++i)
            for (std::size_t j = 0; j < res.m; ++j)
                if (i != j && (*a_matrix)[i][j] > 0.0) offdiag_nonpos = false;
        if (offdiag_nonpos) {
            CheckResult c;
            c.name = "gradsum_bound";
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& r : mons)
                worst = std::max(worst, r.gradsum_sup - mons.front().gradsum_sup);
            c.value = worst;
            c.pass = worst <= 1e-8;
            c.detail = "max gradsum_sup growth over initial";
            out.push_back(c);
        }
    }
    {
        CheckResult c;
        c.name = "initial_gradient_llogl";
        const GradientSet w0 = forward_gradient(res.initial, rc.seam_rise);
        std::vector<double> density(res.grid.node_count(), 0.0);
        for (std::size_t j = 0; j < res.grid.node_count(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < res.m; ++i) s += std::max(0.0, w0.comp[i][j]);
            density[j] = s;
        }
        const double norm = luxemburg_llogl(density, res.grid);
        c.value = norm;
        c.pass = std::isfinite(norm);
        c.detail = "L log L norm of the initial gradient (finite data check)";
        out.push_back(c);
    }
    return out;
}

struct VerifyOutcome {
    std::vector<CheckResult> checks;
    RunResult result;
    RunConfig run_config;
};

inline VerifyOutcome verify_config(const ConfigFile& c) {
    VerifyOutcome v;
    v.run_config = build_run_config(c);
    v.result = run(v.run_config);
    v.checks = run_invariant_checks(v.result, v.run_config, drvdetail::system_matrix(c));
    return v;
}

/// Refinement table: reruns the config at each n (eps coupled to dx when the
/// converge section requests it) and compares the final state against the
/// configured oracle.
inline std::vector<ConvergeRow> converge_study(const ConfigFile& c,
                                               const std::vector<std::size_t>& ns_override = {}) {
    if (!c.converge) throw ConfigError("converge: config has no converge section");
    if (!c.grid) throw ConfigError("converge: config has no grid");
    const ConvergeSection& cs = *c.converge;
    const std::vector<std::size_t>& ns = ns_override.empty() ? cs.ns : ns_override;
    if (ns.size() < 2) throw ConfigError("converge: need at least two refinement levels");

    const RunConfig base = build_run_config(c);
    if (cs.oracle != "self" && base.system.m != 1)
        throw ConfigError("converge: scalar oracles require a one-component system");

    RunOptions light;
    light.record_monitors = false;
    light.keep_snapshots = false;

    std::vector<ConvergeRow> rows;
    for (std::size_t n : ns) {
        RunConfig rc = base;
        rc.grid = make_grid(base.grid.x_min, base.grid.x_max, n, base.grid.topology);
        if (cs.eps_over_dx > 0.0) rc.eps = cs.eps_over_dx * rc.grid.dx;
        const RunResult res = run(rc, light);

        FieldSet exact = make_fields(rc.grid, rc.system.m);
        if (cs.oracle == "burgers_riemann") {
            const double ul = res.initial.comp[0].front();
            const double ur = res.initial.comp[0].back();
            for (std::size_t j = 0; j < rc.grid.node_count(); ++j)
                exact.comp[0][j] = burgers_riemann(ul, ur, rc.t_end, rc.grid.node(j));
        } else if (cs.oracle == "characteristics") {
            const SystemSpec& spec = rc.system;
            const auto a_scalar = [&spec](double v) {
                const double pt[1] = {spec.box.clamp(0, v)};
                double av[1];
                spec.velocity(std::span<const double>(pt, 1), std::span<double>(av, 1));
                return av[0];
            };
            const MonotoneProfile& prof = rc.profiles[0];
            const auto u0_fn = [&prof](double x) { return profile_value(prof, x); };
            for (std::size_t j = 0; j < rc.grid.node_count(); ++j)
                exact.comp[0][j] = characteristics_scalar(a_scalar, u0_fn, rc.t_end, rc.grid.node(j));
        } else {  // self
            exact = fine_reference(rc, cs.refine);
        }

        std::vector<double> err(rc.grid.node_count(), 0.0);
        for (std::size_t j = 0; j < rc.grid.node_count(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rc.system.m; ++i)
                s += std::abs(res.final_state.comp[i][j] - exact.comp[i][j]);
            err[j] = s;
        }
        ConvergeRow row;
        row.n = n;
        row.eps = rc.eps;
        row.l1_error = quad_trapezoid(err, rc.grid);
        rows.push_back(row);
    }
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].l1_error == 0.0) {
            rows[k].order = "exact";
        } else if (rows[k - 1].l1_error > 0.0) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f",
                          std::log2(rows[k - 1].l1_error / rows[k].l1_error));
            rows[k].order = buf;
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CLI entry points. Each returns a process exit code.

namespace drvdetail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    std::filesystem::create_directories(dir);
    return dir + "/" + name;
}

inline void print_checks(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  measured=" << g17(c.value)
                  << "  (" << c.detail << ")\n";
}

inline bool all_pass(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

}  // namespace drvdetail

inline int cmd_run(const std::string& config_path, const std::string& out_dir, bool strict) {
    const ConfigFile c = load_config(config_path);
    if (is_rescale_config(c) && !c.grid) {
        std::cerr << "run: '" << config_path << "' is a rescale experiment; use 'dislocation rescale'\n";
        return 2;
    }
    const RunConfig rc = build_run_config(c);
    const RunResult res = run(rc);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

    write_fields_csv(drvdetail::join_path(out_dir, c.outputs.fields_csv), res.final_state);
    write_monitors_csv(drvdetail::join_path(out_dir, c.outputs.monitors_csv), res.monitors, res.m);
    std::cout << "run: " << res.total_steps << " steps to t=" << g17(res.monitors.back().t)
              << ", wrote " << c.outputs.fields_csv << " and " << c.outputs.monitors_csv << "\n";

    if (strict) {
        const auto checks = run_invariant_checks(res, rc, drvdetail::system_matrix(c));
        drvdetail::print_checks(checks);
        if (!drvdetail::all_pass(checks)) return 1;
    }
    return 0;
}

inline int cmd_verify(const std::string& config_path, bool strict) {
    const ConfigFile c = load_config(config_path);
    if (is_rescale_config(c) && !c.grid) {
        std::cerr << "verify: '" << config_path << "' is a rescale experiment; use 'dislocation rescale'\n";
        return 2;
    }
    const VerifyOutcome v = verify_config(c);
    for (const auto& w : v.result.warnings) std::cerr << "warning: " << w << "\n";
    drvdetail::print_checks(v.checks);
    const bool ok = drvdetail::all_pass(v.checks);
    std::cout << (ok ? "verify: all checks passed\n" : "verify: some checks FAILED\n");
    return ok || !strict ? 0 : 1;
}

inline int cmd_converge(const std::string& config_path, const std::string& out_dir,
                        const std::vector<std::size_t>& refine_override) {
    const ConfigFile c = load_config(config_path);
    const auto rows = converge_study(c, refine_override);
    const std::string path = drvdetail::join_path(out_dir, "converge.csv");
    write_converge_csv(path, rows);
    std::cout << "n,eps,l1_error,observed_order\n";
    for (const auto& r : rows)
        std::cout << r.n << "," << g17(r.eps) << "," << g17(r.l1_error) << "," << r.order << "\n";
    std::cout << "converge: wrote " << path << "\n";
    return 0;
}

inline int cmd_plot(const std::string& csv_path) {
    const std::string script = write_plot_script(csv_path);
    std::cout << "plot: wrote " << script << "\n";
    return 0;
}

inline int cmd_rescale(const std::string& config_path, const std::string& out_dir, bool strict) {
    const ConfigFile c = load_config(config_path);
    if (!c.rescale) {
        std::cerr << "rescale: '" << config_path << "' has no rescale section\n";
        return 2;
    }
    const DislocationSpec spec = dislocation_spec_from(c);
    RescaleOptions opts;
    opts.nodes_per_unit = c.rescale->nodes_per_unit;
    opts.t_end = c.time.t_end;
    opts.cfl = c.time.cfl;
    opts.eps = c.eps;
    opts.mollify_eps = c.mollify_eps;
    const auto rows = rescale_experiment(spec, c.profiles, c.rescale->deltas, opts);
    const std::string path = drvdetail::join_path(out_dir, "rescale.csv");
    write_rescale_csv(path, rows);
    bool decreasing = true;
    std::cout << "delta,nonlocal_sup,distance_to_local\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::cout << g17(rows[k].delta) << "," << g17(rows[k].nonlocal_sup) << ","
                  << g17(rows[k].distance) << "\n";
        if (k > 0 && !(rows[k].nonlocal_sup < rows[k - 1].nonlocal_sup &&
                       rows[k].distance < rows[k - 1].distance))
            decreasing = false;
    }
    std::cout << "rescale: wrote " << path
              << (decreasing ? " (both columns decreasing)\n" : " (columns NOT decreasing)\n");
    return decreasing || !strict ? 0 : 1;
}

}  // namespace dhs
