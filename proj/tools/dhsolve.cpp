// Command-line driver: config-driven runs, invariant verification,
// convergence studies, plot-script emission, and the dislocation
// experiments.
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dhs/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"diagonal hyperbolic system solver"};
    app.require_subcommand(1);

    std::string config_path, csv_path, out_dir = ".";
    bool strict = false;
    std::vector<std::size_t> refine;

    auto* run = app.add_subcommand("run", "run a config and write CSV outputs");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_flag("--strict", strict, "nonzero exit on any invariant violation");
    run->add_option("--out-dir", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "run the full invariant suite");
    verify->add_option("config", config_path, "JSON config file")->required();
    verify->add_flag("--strict", strict, "nonzero exit on any failed check");

    auto* converge = app.add_subcommand("converge", "refinement study against an oracle");
    converge->add_option("config", config_path, "JSON config file")->required();
    converge->add_option("--refine", refine, "comma-separated cell counts")->delimiter(',');
    converge->add_option("--out-dir", out_dir, "output directory");

    auto* plot = app.add_subcommand("plot", "write a gnuplot script next to a CSV");
    plot->add_option("csv", csv_path, "CSV file produced by run/converge")->required();

    auto* dislocation = app.add_subcommand("dislocation", "dislocation-density experiments");
    dislocation->require_subcommand(1);
    auto* drun = dislocation->add_subcommand("run", "periodic multi-slip run");
    drun->add_option("config", config_path, "JSON config file")->required();
    drun->add_flag("--strict", strict, "nonzero exit on any invariant violation");
    drun->add_option("--out-dir", out_dir, "output directory");
    auto* drescale = dislocation->add_subcommand("rescale", "delta-rescaling limit experiment");
    drescale->add_option("config", config_path, "JSON config file")->required();
    drescale->add_flag("--strict", strict, "nonzero exit when columns fail to decrease");
    drescale->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return dhs::cmd_run(config_path, out_dir, strict);
        if (verify->parsed()) return dhs::cmd_verify(config_path, strict);
        if (converge->parsed()) return dhs::cmd_converge(config_path, out_dir, refine);
        if (plot->parsed()) return dhs::cmd_plot(csv_path);
        if (dislocation->parsed()) {
            if (drun->parsed()) return dhs::cmd_run(config_path, out_dir, strict);
            if (drescale->parsed()) return dhs::cmd_rescale(config_path, out_dir, strict);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
