// Deterministic CSV emission (fixed column order, 17 significant digits,
// LF line endings) and companion gnuplot scripts.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhs/estimates.hpp"
#include "dhs/grid.hpp"

namespace dhs {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF endings on every platform
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline void write_fields_csv(const std::string& path, const FieldSet& f) {
    std::ofstream out = open_csv(path);
    out << "x";
    for (std::size_t i = 0; i < f.m(); ++i) out << ",u_" << i + 1;
    out << "\n";
    for (std::size_t j = 0; j < f.grid.node_count(); ++j) {
        out << g17(f.grid.node(j));
        for (std::size_t i = 0; i < f.m(); ++i) out << "," << g17(f.comp[i][j]);
        out << "\n";
    }
}

inline void write_monitors_csv(const std::string& path, const std::vector<MonitorReport>& series,
                               std::size_t m) {
    std::ofstream out = open_csv(path);
    out << "t";
    for (std::size_t i = 0; i < m; ++i) out << ",linf_" << i + 1;
    for (std::size_t i = 0; i < m; ++i) out << ",l1grad_" << i + 1;
    out << ",entropy_n,dissipation_d,cum_dissipation,gradsum_sup,mono_min,box_excursion\n";
    for (const auto& r : series) {
        out << g17(r.t);
        for (std::size_t i = 0; i < m; ++i) out << "," << g17(r.linf[i]);
        for (std::size_t i = 0; i < m; ++i) out << "," << g17(r.l1grad[i]);
        out << "," << g17(r.entropy_n) << "," << g17(r.dissipation_d) << ","
            << g17(r.cum_dissipation) << "," << g17(r.gradsum_sup) << "," << g17(r.mono_min)
            << "," << g17(r.box_excursion) << "\n";
    }
}

struct ConvergeRow {
    std::size_t n = 0;
    double eps = 0.0;
    double l1_error = 0.0;
    std::string order;  // "", a number, or "exact"
};

inline void write_converge_csv(const std::string& path, const std::vector<ConvergeRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "n,eps,l1_error,observed_order\n";
    for (const auto& r : rows)
        out << r.n << "," << g17(r.eps) << "," << g17(r.l1_error) << "," << r.order << "\n";
}

inline void write_rescale_csv(const std::string& path, const std::vector<RescaleRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "delta,nonlocal_sup,distance_to_local\n";
    for (const auto& r : rows)
        out << g17(r.delta) << "," << g17(r.nonlocal_sup) << "," << g17(r.distance) << "\n";
}

/// Writes <csv>.gp next to the CSV, plotting every column against the first
/// (works for both profile and time-series files). The script references the
/// CSV by its bare (relative) file name.
inline std::string write_plot_script(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("plot: cannot open '" + csv_path + "'");
    std::string header;
    std::getline(in, header);
    if (header.empty()) throw std::runtime_error("plot: '" + csv_path + "' has no header");
    std::vector<std::string> cols;
    std::string tok;
    for (char ch : header) {
        if (ch == ',') {
            cols.push_back(tok);
            tok.clear();
        } else if (ch != '\r') {
            tok += ch;
        }
    }
    cols.push_back(tok);
    if (cols.size() < 2) throw std::runtime_error("plot: '" + csv_path + "' has fewer than 2 columns");

    const auto slash = csv_path.find_last_of('/');
    const std::string dir = slash == std::string::npos ? "" : csv_path.substr(0, slash + 1);
    const std::string base = slash == std::string::npos ? csv_path : csv_path.substr(slash + 1);
    const std::string script_path = dir + base + ".gp";

    std::ofstream out(script_path, std::ios::binary);
    if (!out) throw std::runtime_error("plot: cannot write '" + script_path + "'");
    out << "# gnuplot script for " << base << "\n";
    out << "set datafile separator ','\n";
    out << "set key outside\n";
    out << "set xlabel '" << cols[0] << "'\n";
    out << "plot \\\n";
    for (std::size_t c = 1; c < cols.size(); ++c) {
        out << "  '" << base << "' using 1:" << c + 1 << " with lines title '" << cols[c] << "'";
        out << (c + 1 < cols.size() ? ", \\\n" : "\n");
    }
    out << "pause -1\n";
    return script_path;
}

}  // namespace dhs
