// JSON run-configuration format: strict schema (unknown keys rejected),
// round-trippable serialization, and materialization into solver configs.
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhs/dislocation.hpp"
#include "dhs/initial_data.hpp"
#include "dhs/solver.hpp"
#include "dhs/system.hpp"

namespace dhs {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridSection {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n = 2;
    Topology topology = Topology::line;
};

struct TimeSection {
    double t_end = 1.0;
    double cfl = 0.4;
};

struct OutputsSection {
    std::string fields_csv = "fields.csv";
    std::string monitors_csv = "monitors.csv";
    std::size_t snapshots = 64;
};

struct SystemSection {
    std::string kind;  // burgers | crossing | linear | dislocation
    std::optional<Matrix> a;                         // linear
    std::optional<BoxU> box;                         // linear
    std::optional<std::size_t> n_slip;               // dislocation
    std::optional<Matrix> a_half;                    // dislocation
    std::optional<Matrix> q_half;                    // dislocation
    std::optional<double> period;                    // dislocation
    std::optional<std::vector<double>> slopes;       // dislocation
};

struct ConvergeSection {
    std::string oracle;  // burgers_riemann | characteristics | self
    double eps_over_dx = 0.0;
    std::vector<std::size_t> ns;
    std::size_t refine = 4;  // self-reference refinement factor
};

struct RescaleSection {
    std::vector<double> deltas;
    std::size_t nodes_per_unit = 64;
};

struct ConfigFile {
    SystemSection system;
    std::vector<MonotoneProfile> profiles;
    std::optional<GridSection> grid;  // required unless rescale-only
    double eps = 0.0;
    double mollify_eps = 0.0;
    TimeSection time;
    std::size_t monitor_every = 1;
    OutputsSection outputs;
    std::optional<ConvergeSection> converge;
    std::optional<RescaleSection> rescale;
};

namespace cfgdetail {

inline void require_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("config: unknown key '" + key + "' in '" + where + "'");
    }
}

inline const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("config: missing key '" + key + "' in '" + where + "'");
    return *it;
}

inline double need_number(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) throw ConfigError("config: '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

inline std::size_t need_uint(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number_unsigned())
        throw ConfigError("config: '" + where + "." + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline std::vector<double> as_vector(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("config: '" + where + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("config: '" + where + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline Matrix as_matrix(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("config: '" + where + "' must be a matrix");
    Matrix out;
    for (const auto& row : v) out.push_back(as_vector(row, where));
    return out;
}

}  // namespace cfgdetail

inline MonotoneProfile profile_from_json(const json& j, const std::string& where) {
    using namespace cfgdetail;
    const std::string kind = need(j, "kind", where).get<std::string>();
    if (kind == "smoothstep" || kind == "tanhstep") {
        require_keys(j, {"kind", "lo", "hi", "center", "width"}, where);
        const double lo = need_number(j, "lo", where), hi = need_number(j, "hi", where);
        const double c = need_number(j, "center", where), w = need_number(j, "width", where);
        MonotoneProfile p = kind == "smoothstep" ? MonotoneProfile(Smoothstep{lo, hi, c, w})
                                                 : MonotoneProfile(Tanhstep{lo, hi, c, w});
        validate_profile(p);
        return p;
    }
    if (kind == "table") {
        require_keys(j, {"kind", "x", "y"}, where);
        MonotoneProfile p = TableProfile{as_vector(need(j, "x", where), where + ".x"),
                                         as_vector(need(j, "y", where), where + ".y")};
        validate_profile(p);
        return p;
    }
    if (kind == "linear_ramp") {
        require_keys(j, {"kind", "slope", "offset"}, where);
        MonotoneProfile p = LinearRamp{need_number(j, "slope", where), need_number(j, "offset", where)};
        validate_profile(p);
        return p;
    }
    throw ConfigError("config: unknown profile kind '" + kind + "' in '" + where + "'");
}

inline json profile_to_json(const MonotoneProfile& p) {
    json j;
    if (const auto* s = std::get_if<Smoothstep>(&p)) {
        j["kind"] = "smoothstep";
        j["lo"] = s->lo;
        j["hi"] = s->hi;
        j["center"] = s->center;
        j["width"] = s->width;
    } else if (const auto* s = std::get_if<Tanhstep>(&p)) {
        j["kind"] = "tanhstep";
        j["lo"] = s->lo;
        j["hi"] = s->hi;
        j["center"] = s->center;
        j["width"] = s->width;
    } else if (const auto* t = std::get_if<TableProfile>(&p)) {
        j["kind"] = "table";
        j["x"] = t->x;
        j["y"] = t->y;
    } else {
        const auto& r = std::get<LinearRamp>(p);
        j["kind"] = "linear_ramp";
        j["slope"] = r.slope;
        j["offset"] = r.offset;
    }
    return j;
}

inline ConfigFile config_from_json(const json& j) {
    using namespace cfgdetail;
    require_keys(j,
                 {"system", "profile", "grid", "eps", "mollify_eps", "time", "monitor_every",
                  "outputs", "converge", "rescale"},
                 "config");
    ConfigFile c;

    const json& sys = need(j, "system", "config");
    c.system.kind = need(sys, "kind", "system").get<std::string>();
    if (c.system.kind == "burgers" || c.system.kind == "crossing") {
        require_keys(sys, {"kind"}, "system");
    } else if (c.system.kind == "linear") {
        require_keys(sys, {"kind", "a", "box"}, "system");
        c.system.a = as_matrix(need(sys, "a", "system"), "system.a");
        const json& bx = need(sys, "box", "system");
        require_keys(bx, {"lo", "hi"}, "system.box");
        BoxU box{as_vector(need(bx, "lo", "system.box"), "system.box.lo"),
                 as_vector(need(bx, "hi", "system.box"), "system.box.hi")};
        box.validate();
        c.system.box = box;
    } else if (c.system.kind == "dislocation") {
        require_keys(sys, {"kind", "n_slip", "a_half", "q_half", "period", "slopes"}, "system");
        c.system.n_slip = need_uint(sys, "n_slip", "system");
        c.system.a_half = as_matrix(need(sys, "a_half", "system"), "system.a_half");
        c.system.q_half = as_matrix(need(sys, "q_half", "system"), "system.q_half");
        c.system.period = need_number(sys, "period", "system");
        c.system.slopes = as_vector(need(sys, "slopes", "system"), "system.slopes");
    } else {
        throw ConfigError("config: unknown system kind '" + c.system.kind + "'");
    }

    const json& profs = need(j, "profile", "config");
    if (!profs.is_array() || profs.empty())
        throw ConfigError("config: 'profile' must be a non-empty array");
    for (std::size_t i = 0; i < profs.size(); ++i)
        c.profiles.push_back(profile_from_json(profs[i], "profile[" + std::to_string(i) + "]"));

    if (j.contains("grid")) {
        const json& gj = j["grid"];
        require_keys(gj, {"x_min", "x_max", "n", "topology"}, "grid");
        GridSection gs;
        gs.x_min = need_number(gj, "x_min", "grid");
        gs.x_max = need_number(gj, "x_max", "grid");
        gs.n = need_uint(gj, "n", "grid");
        const std::string topo = need(gj, "topology", "grid").get<std::string>();
        if (topo == "line")
            gs.topology = Topology::line;
        else if (topo == "periodic")
            gs.topology = Topology::periodic;
        else
            throw ConfigError("config: grid.topology must be 'line' or 'periodic'");
        make_grid(gs.x_min, gs.x_max, gs.n, gs.topology);  // schema-validate
        c.grid = gs;
    }

    c.eps = need_number(j, "eps", "config");
    c.mollify_eps = need_number(j, "mollify_eps", "config");
    if (c.eps < 0.0) throw ConfigError("config: eps must be >= 0");
    if (c.mollify_eps < 0.0) throw ConfigError("config: mollify_eps must be >= 0");

    const json& tj = need(j, "time", "config");
    require_keys(tj, {"t_end", "cfl"}, "time");
    c.time.t_end = need_number(tj, "t_end", "time");
    c.time.cfl = need_number(tj, "cfl", "time");
    if (!(c.time.t_end > 0.0)) throw ConfigError("config: time.t_end must be > 0");
    if (!(c.time.cfl > 0.0 && c.time.cfl < 1.0)) throw ConfigError("config: time.cfl must be in (0,1)");

    c.monitor_every = need_uint(j, "monitor_every", "config");
    if (c.monitor_every < 1) throw ConfigError("config: monitor_every must be >= 1");

    const json& oj = need(j, "outputs", "config");
    require_keys(oj, {"fields_csv", "monitors_csv", "snapshots"}, "outputs");
    c.outputs.fields_csv = need(oj, "fields_csv", "outputs").get<std::string>();
    c.outputs.monitors_csv = need(oj, "monitors_csv", "outputs").get<std::string>();
    c.outputs.snapshots = need_uint(oj, "snapshots", "outputs");

    if (j.contains("converge")) {
        const json& cj = j["converge"];
        require_keys(cj, {"oracle", "eps_over_dx", "ns", "refine"}, "converge");
        ConvergeSection cs;
        cs.oracle = need(cj, "oracle", "converge").get<std::string>();
        if (cs.oracle != "burgers_riemann" && cs.oracle != "characteristics" && cs.oracle != "self")
            throw ConfigError("config: converge.oracle must be burgers_riemann, characteristics or self");
        cs.eps_over_dx = need_number(cj, "eps_over_dx", "converge");
        for (double v : as_vector(need(cj, "ns", "converge"), "converge.ns"))
            cs.ns.push_back(static_cast<std::size_t>(v));
        if (cj.contains("refine")) cs.refine = need_uint(cj, "refine", "converge");
        c.converge = cs;
    }
    if (j.contains("rescale")) {
        const json& rj = j["rescale"];
        require_keys(rj, {"deltas", "nodes_per_unit"}, "rescale");
        RescaleSection rs;
        rs.deltas = as_vector(need(rj, "deltas", "rescale"), "rescale.deltas");
        rs.nodes_per_unit = need_uint(rj, "nodes_per_unit", "rescale");
        c.rescale = rs;
    }
    if (!c.grid && !c.rescale)
        throw ConfigError("config: 'grid' is required unless a rescale section is present");
    return c;
}

inline json config_to_json(const ConfigFile& c) {
    json j;
    json sys;
    sys["kind"] = c.system.kind;
    if (c.system.a) sys["a"] = *c.system.a;
    if (c.system.box) sys["box"] = {{"lo", c.system.box->lo}, {"hi", c.system.box->hi}};
    if (c.system.n_slip) sys["n_slip"] = *c.system.n_slip;
    if (c.system.a_half) sys["a_half"] = *c.system.a_half;
    if (c.system.q_half) sys["q_half"] = *c.system.q_half;
    if (c.system.period) sys["period"] = *c.system.period;
    if (c.system.slopes) sys["slopes"] = *c.system.slopes;
    j["system"] = sys;

    json profs = json::array();
    for (const auto& p : c.profiles) profs.push_back(profile_to_json(p));
    j["profile"] = profs;

    if (c.grid) {
        j["grid"] = {{"x_min", c.grid->x_min},
                     {"x_max", c.grid->x_max},
                     {"n", c.grid->n},
                     {"topology", c.grid->topology == Topology::line ? "line" : "periodic"}};
    }
    j["eps"] = c.eps;
    j["mollify_eps"] = c.mollify_eps;
    j["time"] = {{"t_end", c.time.t_end}, {"cfl", c.time.cfl}};
    j["monitor_every"] = c.monitor_every;
    j["outputs"] = {{"fields_csv", c.outputs.fields_csv},
                    {"monitors_csv", c.outputs.monitors_csv},
                    {"snapshots", c.outputs.snapshots}};
    if (c.converge) {
        json cj;
        cj["oracle"] = c.converge->oracle;
        cj["eps_over_dx"] = c.converge->eps_over_dx;
        cj["ns"] = c.converge->ns;
        cj["refine"] = c.converge->refine;
        j["converge"] = cj;
    }
    if (c.rescale) {
        j["rescale"] = {{"deltas", c.rescale->deltas}, {"nodes_per_unit", c.rescale->nodes_per_unit}};
    }
    return j;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

/// True when the config describes the rescale experiment rather than a
/// single runnable evolution.
inline bool is_rescale_config(const ConfigFile& c) { return c.rescale.has_value(); }

inline DislocationSpec dislocation_spec_from(const ConfigFile& c) {
    if (c.system.kind != "dislocation")
        throw ConfigError("config: not a dislocation system");
    DislocationSpec d;
    d.n_slip = c.system.n_slip.value();
    d.a_half = c.system.a_half.value();
    d.q_half = c.system.q_half.value();
    d.period = c.system.period.value_or(1.0);
    return d;
}

/// Materializes a runnable solver configuration.
inline RunConfig build_run_config(const ConfigFile& c) {
    if (!c.grid) throw ConfigError("config: no grid; this config is a rescale experiment");
    const Grid1D grid = make_grid(c.grid->x_min, c.grid->x_max, c.grid->n, c.grid->topology);

    if (c.system.kind == "dislocation") {
        const DislocationSpec d = dislocation_spec_from(c);
        const auto& slopes = c.system.slopes.value();
        RunConfig rc = make_periodic_run_config(d, c.profiles, slopes, grid, c.eps, c.time.t_end,
                                                c.time.cfl, c.monitor_every, c.mollify_eps);
        rc.max_snapshots = std::max<std::size_t>(2, c.outputs.snapshots);
        return rc;
    }

    RunConfig rc;
    if (c.system.kind == "burgers")
        rc.system = burgers();
    else if (c.system.kind == "crossing")
        rc.system = crossing();
    else if (c.system.kind == "linear")
        rc.system = linear(c.system.a.value(), c.system.box.value());
    else
        throw ConfigError("config: unknown system kind '" + c.system.kind + "'");
    if (rc.system.m != c.profiles.size())
        throw ConfigError("config: profile count does not match the system components");
    rc.profiles = c.profiles;
    rc.grid = grid;
    rc.eps = c.eps;
    rc.t_end = c.time.t_end;
    rc.cfl = c.time.cfl;
    rc.mollify_eps = c.mollify_eps;
    rc.monitor_every = c.monitor_every;
    rc.max_snapshots = std::max<std::size_t>(2, c.outputs.snapshots);
    return rc;
}

}  // namespace dhs
