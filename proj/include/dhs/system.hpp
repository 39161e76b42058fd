// Diagonal systems: the admissible box, velocity maps a(u), Jacobians,
// cone-copositivity sampling, and the built-in example systems.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dhs/grid.hpp"

namespace dhs {

/// Admissible box U = prod_i [lo_i, hi_i].
struct BoxU {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    void validate() const {
        if (lo.size() != hi.size()) throw std::invalid_argument("BoxU: lo/hi size mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i])
                throw std::invalid_argument("BoxU: requires finite lo <= hi");
        }
    }
    double clamp(std::size_t i, double v) const {
        return v < lo[i] ? lo[i] : (v > hi[i] ? hi[i] : v);
    }
    /// Max componentwise distance of u outside the box (0 if inside).
    double excursion(std::span<const double> u) const {
        double e = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] < lo[i]) e = std::max(e, lo[i] - u[i]);
            if (u[i] > hi[i]) e = std::max(e, u[i] - hi[i]);
        }
        return e;
    }
};

/// Constant-in-x velocity shift scale * Q * (integral of u over the domain),
/// evaluated once per time step.
struct NonlocalTerm {
    std::vector<std::vector<double>> q;  // m x m
    double scale = 1.0;
};

using VelocityFn = std::function<void(std::span<const double> u, std::span<double> a)>;
using JacobianFn = std::function<void(std::span<const double> u, std::span<double> jac_rowmajor)>;

/// One diagonal system: component count, box, velocity map, optional
/// analytic Jacobian, and the bounds that enter the a-priori estimates.
struct SystemSpec {
    std::size_t m = 1;
    BoxU box;
    VelocityFn velocity;
    JacobianFn jacobian;  // may be empty; finite differences then apply
    double m0 = 0.0;      // sup |a^i| over the box
    double m1 = 0.0;      // Lipschitz bound, max row sum of |Da| over the box
    std::optional<NonlocalTerm> nonlocal;
};

inline constexpr double kBoxClampTol = 1e-9;

/// a(u) for u inside the box (componentwise, clamping tolerance 1e-9).
inline std::vector<double> eval_velocity(const SystemSpec& spec, std::span<const double> u) {
    if (u.size() != spec.m) throw std::invalid_argument("eval_velocity: wrong point dimension");
    std::vector<double> pt(u.begin(), u.end());
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (pt[i] < spec.box.lo[i] - kBoxClampTol || pt[i] > spec.box.hi[i] + kBoxClampTol)
            throw std::domain_error("eval_velocity: point outside box beyond tolerance");
        pt[i] = spec.box.clamp(i, pt[i]);
    }
    std::vector<double> a(spec.m, 0.0);
    spec.velocity(pt, a);
    for (double v : a)
        if (!std::isfinite(v)) throw std::runtime_error("eval_velocity: non-finite velocity");
    return a;
}

namespace detail {

/// Central finite differences with h = 1e-6*max(1,|u_j|), one-sided at the
/// box faces so the stencil never leaves the box.
inline void fd_jacobian(const SystemSpec& spec, std::span<const double> u, std::span<double> jac) {
    std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
    std::vector<double> ap(spec.m), am(spec.m);
    for (std::size_t j = 0; j < spec.m; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
        const double xp = std::min(u[j] + h, spec.box.hi[j]);
        const double xm = std::max(u[j] - h, spec.box.lo[j]);
        up[j] = xp;
        um[j] = xm;
        if (xp > xm) {
            spec.velocity(up, ap);
            spec.velocity(um, am);
            const double inv = 1.0 / (xp - xm);
            for (std::size_t i = 0; i < spec.m; ++i) jac[i * spec.m + j] = (ap[i] - am[i]) * inv;
        } else {
            for (std::size_t i = 0; i < spec.m; ++i) jac[i * spec.m + j] = 0.0;  // degenerate face
        }
        up[j] = u[j];
        um[j] = u[j];
    }
}

}  // namespace detail

/// Da(u) = (d a^i / d u^j), row-major. Uses the analytic matrix if provided.
inline std::vector<double> eval_jacobian(const SystemSpec& spec, std::span<const double> u) {
    if (u.size() != spec.m) throw std::invalid_argument("eval_jacobian: wrong point dimension");
    std::vector<double> pt(u.begin(), u.end());
    for (std::size_t i = 0; i < spec.m; ++i) {
        if (pt[i] < spec.box.lo[i] - kBoxClampTol || pt[i] > spec.box.hi[i] + kBoxClampTol)
            throw std::domain_error("eval_jacobian: point outside box beyond tolerance");
        pt[i] = spec.box.clamp(i, pt[i]);
    }
    std::vector<double> jac(spec.m * spec.m, 0.0);
    if (spec.jacobian)
        spec.jacobian(pt, jac);
    else
        detail::fd_jacobian(spec, pt, jac);
    return jac;
}

struct H2Report {
    double min_quadform = 0.0;
    std::vector<double> worst_u;
    std::vector<double> worst_xi;
    // Exact verdict from the closed form, available for m <= 2 only
    // (evaluated at every sampled u; exact for constant Jacobians).
    std::optional<bool> exact_copositive;
};

/// Closed-form cone-copositivity test for 1x1 and 2x2 matrices.
inline std::optional<bool> copositive_closed_form(std::span<const double> jac, std::size_t m) {
    if (m == 1) return jac[0] >= 0.0;
    if (m == 2) {
        const double a11 = jac[0], a12 = jac[1], a21 = jac[2], a22 = jac[3];
        if (a11 < 0.0 || a22 < 0.0) return false;
        return a12 + a21 >= -2.0 * std::sqrt(a11 * a22);
    }
    return std::nullopt;
}

namespace detail {

// Enumerates xi = c / resolution over nonnegative integer compositions
// |c| = resolution (lattice on the unit simplex of the nonnegative cone).
inline void for_each_simplex_point(std::size_t m, std::size_t resolution,
                                   const std::function<void(std::span<const double>)>& fn) {
    std::vector<std::size_t> c(m, 0);
    std::vector<double> xi(m, 0.0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == m) {
            c[i] = left;
            for (std::size_t k = 0; k < m; ++k)
                xi[k] = static_cast<double>(c[k]) / static_cast<double>(resolution);
            fn(xi);
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            c[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, resolution);
}

}  // namespace detail

/// Samples q(u, xi) = sum_{ij} xi_i xi_j (Da(u))_{ij} over a lattice of box
/// points and simplex directions in the nonnegative cone. A sampled check,
/// not a certificate; the m <= 2 closed form is reported alongside.
inline H2Report check_h2(const SystemSpec& spec, std::size_t samples_u, std::size_t samples_xi) {
    if (samples_u < 1 || samples_xi < 1)
        throw std::invalid_argument("check_h2: requires at least one sample per axis");
    H2Report rep;
    rep.min_quadform = std::numeric_limits<double>::infinity();
    bool closed_form_all = true;
    bool closed_form_known = spec.m <= 2;

    std::vector<double> u(spec.m, 0.0);
    std::vector<std::size_t> idx(spec.m, 0);
    const std::size_t per_axis = samples_u;
    std::vector<double> jac;
    const std::size_t total = [&] {
        std::size_t t = 1;
        for (std::size_t i = 0; i < spec.m; ++i) t *= per_axis;
        return t;
    }();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = 0; i < spec.m; ++i) {
            idx[i] = rem % per_axis;
            rem /= per_axis;
            const double lo = spec.box.lo[i], hi = spec.box.hi[i];
            u[i] = per_axis == 1 ? 0.5 * (lo + hi)
                                 : lo + (hi - lo) * static_cast<double>(idx[i]) /
                                            static_cast<double>(per_axis - 1);
        }
        jac = eval_jacobian(spec, u);
        if (closed_form_known) {
            auto ok = copositive_closed_form(jac, spec.m);
            if (ok && !*ok) closed_form_all = false;
        }
        detail::for_each_simplex_point(spec.m, samples_xi, [&](std::span<const double> xi) {
            double q = 0.0;
            for (std::size_t i = 0; i < spec.m; ++i)
                for (std::size_t j = 0; j < spec.m; ++j)
                    q += xi[i] * xi[j] * jac[i * spec.m + j];
            if (q < rep.min_quadform) {
                rep.min_quadform = q;
                rep.worst_u.assign(u.begin(), u.end());
                rep.worst_xi.assign(xi.begin(), xi.end());
            }
        });
    }
    if (closed_form_known) rep.exact_copositive = closed_form_all;
    return rep;
}

/// Max |(Da)_{ij}| over a sampled box lattice (exact for constant Jacobians).
inline double jacobian_abs_max(const SystemSpec& spec, std::size_t samples_u = 9) {
    double worst = 0.0;
    std::vector<double> u(spec.m, 0.0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < spec.m; ++i) total *= samples_u;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = 0; i < spec.m; ++i) {
            const std::size_t k = rem % samples_u;
            rem /= samples_u;
            const double lo = spec.box.lo[i], hi = spec.box.hi[i];
            u[i] = samples_u == 1 ? 0.5 * (lo + hi)
                                  : lo + (hi - lo) * static_cast<double>(k) /
                                             static_cast<double>(samples_u - 1);
        }
        for (double v : eval_jacobian(spec, u)) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Built-in systems.

/// Scalar a(u) = u on the given range (the classical convex scalar case).
inline SystemSpec burgers(double lo = 0.0, double hi = 1.0) {
    SystemSpec s;
    s.m = 1;
    s.box = BoxU{{lo}, {hi}};
    s.box.validate();
    s.velocity = [](std::span<const double> u, std::span<double> a) { a[0] = u[0]; };
    s.jacobian = [](std::span<const double>, std::span<double> j) { j[0] = 1.0; };
    s.m0 = std::max(std::abs(lo), std::abs(hi));
    s.m1 = 1.0;
    return s;
}

/// Two-component system with crossing characteristic speeds:
/// a1 = cos(u2), a2 = u1 sin(u2) on [0,1] x [-pi/2, pi/2].
inline SystemSpec crossing() {
    SystemSpec s;
    s.m = 2;
    s.box = BoxU{{0.0, -std::numbers::pi / 2}, {1.0, std::numbers::pi / 2}};
    s.velocity = [](std::span<const double> u, std::span<double> a) {
        a[0] = std::cos(u[1]);
        a[1] = u[0] * std::sin(u[1]);
    };
    s.jacobian = [](std::span<const double> u, std::span<double> j) {
        j[0] = 0.0;
        j[1] = -std::sin(u[1]);
        j[2] = std::sin(u[1]);
        j[3] = u[0] * std::cos(u[1]);
    };
    s.m0 = 1.0;
    s.m1 = 2.0;  // max row sum of |Da| over the box
    return s;
}

/// Linear velocities a(u) = A u on the given box.
inline SystemSpec linear(const std::vector<std::vector<double>>& a_matrix, BoxU box) {
    const std::size_t m = a_matrix.size();
    box.validate();
    if (box.dim() != m) throw std::invalid_argument("linear: box dimension mismatch");
    for (const auto& row : a_matrix)
        if (row.size() != m) throw std::invalid_argument("linear: matrix must be m x m");
    SystemSpec s;
    s.m = m;
    s.box = std::move(box);
    s.velocity = [a_matrix, m](std::span<const double> u, std::span<double> a) {
        for (std::size_t i = 0; i < m; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < m; ++j) v += a_matrix[i][j] * u[j];
            a[i] = v;
        }
    };
    s.jacobian = [a_matrix, m](std::span<const double>, std::span<double> jac) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) jac[i * m + j] = a_matrix[i][j];
    };
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double r0 = 0.0, r1 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            r0 += std::abs(a_matrix[i][j]) * std::max(std::abs(s.box.lo[j]), std::abs(s.box.hi[j]));
            r1 += std::abs(a_matrix[i][j]);
        }
        m0 = std::max(m0, r0);
        m1 = std::max(m1, r1);
    }
    s.m0 = m0;
    s.m1 = m1;
    return s;
}

}  // namespace dhs
