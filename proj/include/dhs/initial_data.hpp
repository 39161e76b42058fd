// Monotone initial profiles and mollification of sampled data.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dhs/grid.hpp"
#include "dhs/system.hpp"

namespace dhs {

struct Smoothstep {  // cubic ramp from lo to hi across [center-width/2, center+width/2]
    double lo = 0.0, hi = 1.0, center = 0.0, width = 1.0;
};
struct Tanhstep {  // lo at -inf, hi at +inf, transition scale = width
    double lo = 0.0, hi = 1.0, center = 0.0, width = 1.0;
};
struct TableProfile {  // piecewise-linear, constant extension outside [x_front, x_back]
    std::vector<double> x;
    std::vector<double> y;
};
struct LinearRamp {
    double slope = 0.0, offset = 0.0;
};

using MonotoneProfile = std::variant<Smoothstep, Tanhstep, TableProfile, LinearRamp>;

inline void validate_profile(const MonotoneProfile& p) {
    if (const auto* s = std::get_if<Smoothstep>(&p)) {
        if (!(s->width > 0.0) || s->hi < s->lo)
            throw std::invalid_argument("smoothstep: requires width > 0 and hi >= lo");
    } else if (const auto* s = std::get_if<Tanhstep>(&p)) {
        if (!(s->width > 0.0) || s->hi < s->lo)
            throw std::invalid_argument("tanhstep: requires width > 0 and hi >= lo");
    } else if (const auto* t = std::get_if<TableProfile>(&p)) {
        if (t->x.empty() || t->x.size() != t->y.size())
            throw std::invalid_argument("table: x and y must be non-empty and equal-sized");
        for (std::size_t k = 0; k + 1 < t->x.size(); ++k) {
            if (!(t->x[k] < t->x[k + 1]))
                throw std::invalid_argument("table: x must be strictly increasing");
            if (t->y[k + 1] < t->y[k])
                throw std::invalid_argument("table: y must be nondecreasing");
        }
        for (double v : t->y)
            if (!std::isfinite(v)) throw std::invalid_argument("table: non-finite y");
    } else if (const auto* r = std::get_if<LinearRamp>(&p)) {
        if (r->slope < 0.0) throw std::invalid_argument("linear_ramp: requires slope >= 0");
    }
}

inline double profile_value(const MonotoneProfile& p, double x) {
    if (const auto* s = std::get_if<Smoothstep>(&p)) {
        const double t = (x - s->center) / s->width + 0.5;
        double v;
        if (t <= 0.0)
            v = 0.0;
        else if (t >= 1.0)
            v = 1.0;
        else
            v = t * t * (3.0 - 2.0 * t);
        return s->lo + (s->hi - s->lo) * v;
    }
    if (const auto* s = std::get_if<Tanhstep>(&p)) {
        return s->lo + (s->hi - s->lo) * 0.5 * (1.0 + std::tanh((x - s->center) / s->width));
    }
    if (const auto* t = std::get_if<TableProfile>(&p)) {
        if (x <= t->x.front()) return t->y.front();
        if (x >= t->x.back()) return t->y.back();
        auto it = std::upper_bound(t->x.begin(), t->x.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - t->x.begin()) - 1;
        const double s = (x - t->x[k]) / (t->x[k + 1] - t->x[k]);
        return t->y[k] + s * (t->y[k + 1] - t->y[k]);
    }
    const auto& r = std::get<LinearRamp>(p);
    return r.offset + r.slope * x;
}

/// Pointwise samples of one profile per component; nondecreasing per
/// component by construction. Pass the system box to reject escaping data.
inline FieldSet sample_profile(const std::vector<MonotoneProfile>& profiles, const Grid1D& g,
                               const BoxU* box = nullptr) {
    FieldSet f = make_fields(g, profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        validate_profile(profiles[i]);
        for (std::size_t j = 0; j < g.node_count(); ++j)
            f.comp[i][j] = profile_value(profiles[i], g.node(j));
        if (box) {
            for (double v : f.comp[i]) {
                if (v < box->lo[i] - kBoxClampTol || v > box->hi[i] + kBoxClampTol)
                    throw std::invalid_argument("sample_profile: samples escape the box");
            }
        }
    }
    require_finite(f, "sample_profile");
    return f;
}

namespace detail {

inline double bump(double s) {
    const double d = 1.0 - s * s;
    if (d <= 0.0) return 0.0;
    return std::exp(-1.0 / d);
}

// Unit mass constant of the bump kernel, by 2001-point trapezoid on (-1,1).
// Not load-bearing: the discrete kernel is renormalized anyway.
inline double bump_mass() {
    static const double z = [] {
        const std::size_t n = 2001;
        const double h = 2.0 / static_cast<double>(n - 1);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double x = -1.0 + h * static_cast<double>(k);
            const double v = bump(x);
            s += (k == 0 || k + 1 == n) ? 0.5 * v : v;
        }
        return s * h;
    }();
    return z;
}

}  // namespace detail

/// Discrete convolution with the compactly supported bump kernel of radius
/// eps, renormalized so the quadrature mass is exactly 1 (the result is a
/// convex combination of samples). Out-of-domain samples use constant
/// extension (line) or wraparound (periodic). Below eps = 2*dx the kernel is
/// under-resolved: the field passes through unchanged and *underresolved is
/// set when provided.
inline FieldSet mollify(const FieldSet& f, double eps, bool* underresolved = nullptr) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollify: requires eps > 0");
    if (underresolved) *underresolved = false;
    const Grid1D& g = f.grid;
    if (eps < 2.0 * g.dx) {
        if (underresolved) *underresolved = true;
        return f;
    }
    const std::size_t radius = static_cast<std::size_t>(std::floor(eps / g.dx));
    const double z = detail::bump_mass();
    std::vector<double> w(2 * radius + 1, 0.0);
    double mass = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double x = (static_cast<double>(k) - static_cast<double>(radius)) * g.dx;
        w[k] = detail::bump(x / eps) / (eps * z) * g.dx;
        mass += w[k];
    }
    for (double& v : w) v /= mass;

    const std::size_t nn = g.node_count();
    FieldSet out = f;
    for (std::size_t i = 0; i < f.m(); ++i) {
        const auto& u = f.comp[i];
        auto& o = out.comp[i];
        for (std::size_t j = 0; j < nn; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                const long off = static_cast<long>(j) + static_cast<long>(k) - static_cast<long>(radius);
                std::size_t src;
                if (g.topology == Topology::line) {
                    src = static_cast<std::size_t>(std::clamp<long>(off, 0, static_cast<long>(nn) - 1));
                } else {
                    long p = off % static_cast<long>(nn);
                    if (p < 0) p += static_cast<long>(nn);
                    src = static_cast<std::size_t>(p);
                }
                acc += w[k] * u[src];
            }
            o[j] = acc;
        }
    }
    return out;
}

/// Min over components and nodes of the forward increments (u_{j+1}-u_j)/dx.
/// Callers compare against -tol_mono.
inline double check_monotone(const FieldSet& f, std::span<const double> seam_rise = {}) {
    const GradientSet w = forward_gradient(f, seam_rise);
    double lo = 0.0;
    bool first = true;
    const std::size_t nn = f.grid.node_count();
    const std::size_t last = f.grid.topology == Topology::line ? nn - 1 : nn;  // skip copied node
    for (std::size_t i = 0; i < w.m(); ++i)
        for (std::size_t j = 0; j < last; ++j) {
            if (first || w.comp[i][j] < lo) lo = w.comp[i][j];
            first = false;
        }
    return lo;
}

}  // namespace dhs
