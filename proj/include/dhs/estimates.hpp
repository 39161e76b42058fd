// The monitored functionals: entropy density f, gradient entropy N(t),
// dissipation quadratic form D(t), the entropy budget inequality, the
// L log L Luxemburg norm, gradient-sum sup, the log modulus of continuity,
// and the exponentially weighted L2 contraction diagnostic.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "dhs/grid.hpp"
#include "dhs/system.hpp"

namespace dhs {

/// Per-record solver diagnostics.
struct MonitorReport {
    double t = 0.0;
    std::vector<double> linf;    // per component
    std::vector<double> l1grad;  // per component, L1 norm of the gradient
    double entropy_n = 0.0;      // N(t)
    double dissipation_d = 0.0;  // D(t)
    double cum_dissipation = 0.0;  // trapezoid time integral of D up to t
    double gradsum_sup = 0.0;      // sup_x sum_i w^i
    double box_excursion = 0.0;    // max distance outside the monitored box
    double mono_min = 0.0;         // min forward increment
};

/// Entropy density: x ln(x) + 1/e above 1/e, 0 on [0, 1/e]. Continuous,
/// nondecreasing, convex.
inline double entropy_f(double x) {
    if (x < 0.0) throw std::domain_error("entropy_f: requires x >= 0");
    constexpr double inv_e = 1.0 / std::numbers::e;
    if (x <= inv_e) return 0.0;
    return x * std::log(x) + inv_e;
}

namespace detail {

/// N for gradients already known to be clamped to [0, inf).
inline double gradient_entropy_nonneg(const GradientSet& w, const Grid1D& g) {
    std::vector<double> density(g.node_count(), 0.0);
    for (std::size_t i = 0; i < w.m(); ++i)
        for (std::size_t j = 0; j < g.node_count(); ++j)
            density[j] += entropy_f(std::max(0.0, w.comp[i][j]));
    return quad_trapezoid(density, g);
}

}  // namespace detail

/// Discrete N(t) = integral of sum_i f(w^i). Entries in [-tol_mono, 0) are
/// rounding noise and clamp to 0; larger negatives are a monotonicity
/// violation and abort.
inline double gradient_entropy(const GradientSet& w, const Grid1D& g) {
    for (std::size_t i = 0; i < w.m(); ++i)
        for (double v : w.comp[i])
            if (v < -kTolMono)
                throw std::runtime_error("gradient_entropy: negative gradient beyond tolerance "
                                         "(monotonicity violation)");
    return detail::gradient_entropy_nonneg(w, g);
}

/// D = integral over x of sum_{ij} (Da(u))_{ij} w^i w^j.
inline double dissipation(const FieldSet& u, const GradientSet& w, const SystemSpec& spec) {
    const Grid1D& g = u.grid;
    std::vector<double> density(g.node_count(), 0.0);
    std::vector<double> pt(spec.m, 0.0);
    for (std::size_t j = 0; j < g.node_count(); ++j) {
        for (std::size_t i = 0; i < spec.m; ++i) pt[i] = spec.box.clamp(i, u.comp[i][j]);
        const std::vector<double> jac = eval_jacobian(spec, pt);
        double q = 0.0;
        for (std::size_t i = 0; i < spec.m; ++i)
            for (std::size_t k = 0; k < spec.m; ++k)
                q += jac[i * spec.m + k] * w.comp[i][j] * w.comp[k][j];
        density[j] = q;
    }
    return quad_trapezoid(density, g);
}

struct BudgetReport {
    std::vector<double> t;
    std::vector<double> lhs;  // N(t) + integral of D
    std::vector<double> rhs;  // N(0) + C t  (tolerance excluded)
    double budget_constant = 0.0;
    double tol_budget = 0.0;
    double max_violation = -std::numeric_limits<double>::infinity();
    bool pass = false;
};

/// Checks N(t) + int_0^t D ds <= N(0) + C t + tol at every recorded time,
/// with C = (2/e) M^2 M1 ||u0||_inf and the time integral by trapezoid over
/// the monitor series. tol = 1e-6 + 0.05 |N(0)| + dx * TV(entropy density at
/// t = 0); pass dx = 0 when the quadrature-error term is unavailable.
inline BudgetReport entropy_budget(const std::vector<MonitorReport>& series,
                                   const SystemSpec& spec, double u0_linf, double dx = 0.0,
                                   double entropy_tv0 = 0.0) {
    if (series.empty()) throw std::invalid_argument("entropy_budget: empty series");
    BudgetReport rep;
    const double mm = static_cast<double>(spec.m);
    rep.budget_constant = (2.0 / std::numbers::e) * mm * mm * spec.m1 * u0_linf;
    const double n0 = series.front().entropy_n;
    rep.tol_budget = 1e-6 + 0.05 * std::abs(n0) + dx * entropy_tv0;
    double integral = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (k > 0)
            integral += 0.5 * (series[k - 1].dissipation_d + series[k].dissipation_d) *
                        (series[k].t - series[k - 1].t);
        const double lhs = series[k].entropy_n + integral;
        const double rhs = n0 + rep.budget_constant * series[k].t;
        rep.t.push_back(series[k].t);
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    }
    rep.pass = rep.max_violation <= rep.tol_budget;
    return rep;
}

/// Luxemburg norm of nonnegative samples for the Young function
/// t ln(1+t): inf{lambda > 0 : integral (s/lambda) ln(1 + s/lambda) <= 1}.
/// Phi(lambda) is strictly decreasing with limits +inf and 0, so the norm is
/// the unique root of Phi = 1, found by bracketed bisection to 1e-10
/// relative tolerance.
inline double luxemburg_llogl(std::span<const double> samples, const Grid1D& g) {
    if (samples.size() != g.node_count())
        throw std::invalid_argument("luxemburg_llogl: sample count does not match grid");
    double peak = 0.0;
    for (double s : samples) {
        if (!std::isfinite(s)) throw std::invalid_argument("luxemburg_llogl: non-finite sample");
        if (s < -kTolMono)
            throw std::runtime_error("luxemburg_llogl: negative sample beyond tolerance");
        peak = std::max(peak, s);
    }
    if (peak == 0.0) return 0.0;

    std::vector<double> integrand(samples.size(), 0.0);
    const auto phi = [&](double lambda) {
        for (std::size_t j = 0; j < samples.size(); ++j) {
            const double r = std::max(0.0, samples[j]) / lambda;
            integrand[j] = r * std::log1p(r);
        }
        return quad_trapezoid(integrand, g);
    };

    double hi = peak;
    for (int k = 0; k < 2000 && phi(hi) > 1.0; ++k) hi *= 2.0;
    double lo = hi;
    while (lo > 1e-300 && phi(0.5 * lo) > 1.0) lo *= 0.5;
    lo *= 0.5;
    if (lo <= 1e-300) return hi;  // degenerate: mass vanishes faster than the bracket
    for (int k = 0; k < 200 && (hi - lo) > 1e-10 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) <= 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Max over nodes of sum_i w^i_j.
inline double gradsum_sup(const GradientSet& w) {
    if (w.m() == 0) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < w.grid.node_count(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < w.m(); ++i) s += w.comp[i][j];
        best = std::max(best, s);
    }
    return best;
}

/// Log modulus of continuity 1/ln(1/delta + 1) + 1/ln(1/h + 1).
inline double continuity_modulus(double delta, double h) {
    if (!(delta > 0.0) || !(h > 0.0))
        throw std::invalid_argument("continuity_modulus: requires delta, h > 0");
    return 1.0 / std::log(1.0 / delta + 1.0) + 1.0 / std::log(1.0 / h + 1.0);
}

struct Snapshot {
    double t = 0.0;
    FieldSet state;
};

/// Max over sampled (t, x, component, delta, h) of
/// |u(t+delta, x+h) - u(t, x)| / omega(delta, h), with h rounded to whole
/// cells and delta to the nearest stored snapshot gap.
inline double modulus_check(const std::vector<Snapshot>& snapshots, std::span<const double> deltas,
                            std::span<const double> hs, std::size_t sample_points) {
    if (snapshots.size() < 2) throw std::invalid_argument("modulus_check: needs >= 2 snapshots");
    if (sample_points < 1) throw std::invalid_argument("modulus_check: needs sample points");
    const Grid1D& g = snapshots.front().state.grid;
    const std::size_t nn = g.node_count();
    double worst = 0.0;
    bool any = false;
    for (double delta : deltas) {
        for (double h : hs) {
            const std::size_t cells = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(h / g.dx)));
            for (std::size_t k = 0; k < snapshots.size(); ++k) {
                // nearest stored partner to t_k + delta
                std::size_t best = k;
                double best_err = std::numeric_limits<double>::infinity();
                for (std::size_t k2 = k + 1; k2 < snapshots.size(); ++k2) {
                    const double err = std::abs(snapshots[k2].t - snapshots[k].t - delta);
                    if (err < best_err) {
                        best_err = err;
                        best = k2;
                    }
                }
                if (best == k) continue;
                const double delta_eff = snapshots[best].t - snapshots[k].t;
                if (delta_eff <= 0.0 || std::abs(delta_eff - delta) > 0.5 * delta) continue;
                const double omega = continuity_modulus(delta_eff, static_cast<double>(cells) * g.dx);
                const std::size_t max_j = g.topology == Topology::periodic ? nn : nn - cells;
                if (max_j == 0) continue;
                const std::size_t stride = std::max<std::size_t>(1, max_j / sample_points);
                for (std::size_t j = 0; j < max_j; j += stride) {
                    const std::size_t jp =
                        g.topology == Topology::periodic ? (j + cells) % nn : j + cells;
                    for (std::size_t i = 0; i < snapshots[k].state.m(); ++i) {
                        const double diff = std::abs(snapshots[best].state.comp[i][jp] -
                                                     snapshots[k].state.comp[i][j]);
                        worst = std::max(worst, diff / omega);
                        any = true;
                    }
                }
            }
        }
    }
    if (!any) throw std::invalid_argument("modulus_check: no representable (delta, h) samples");
    return worst;
}

/// sum_i || (u1^i - u2^i) psi ||_L2^2 with psi(x) = exp(-|x|).
inline double weighted_l2_distance(const FieldSet& u1, const FieldSet& u2) {
    if (!(u1.grid == u2.grid)) throw std::invalid_argument("weighted_l2_distance: grid mismatch");
    if (u1.m() != u2.m()) throw std::invalid_argument("weighted_l2_distance: component mismatch");
    const Grid1D& g = u1.grid;
    std::vector<double> density(g.node_count(), 0.0);
    for (std::size_t j = 0; j < g.node_count(); ++j) {
        const double wgt = std::exp(-2.0 * std::abs(g.node(j)));
        double s = 0.0;
        for (std::size_t i = 0; i < u1.m(); ++i) {
            const double d = u1.comp[i][j] - u2.comp[i][j];
            s += d * d;
        }
        density[j] = s * wgt;
    }
    return quad_trapezoid(density, g);
}

}  // namespace dhs
