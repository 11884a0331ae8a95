// impulseflow <experiment> [--config FILE] [--system NAME] [--seed N] [--out DIR]
//             [--grid lo:hi:bins,...] [--points FILE] [--workers N]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "impulseflow/experiment.hpp"
#include "impulseflow/kernels.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace impulseflow;

    CLI::App app{"Simulation and entropy experiments for impulsive semiflows"};
    app.set_version_flag("--version", std::string(kVersion));

    std::string experiment;
    std::string config_path;
    std::string system;
    std::string out_dir;
    std::string grid;
    std::string points;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool list_systems = false;

    app.add_option("experiment", experiment, "simulate | check-hypotheses | measure | entropy | quotient");
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--system", system, "Fixture name (overrides the config)");
    app.add_option("--seed", seed, "64-bit seed (overrides the config)");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--grid", grid, "Measure grid lo:hi:bins per coordinate, comma separated");
    app.add_option("--points", points, "Quotient input points (CSV with a header row)")->check(CLI::ExistingFile);
    app.add_option("--workers", workers, "Worker threads; results do not depend on it");
    app.add_flag("--list-systems", list_systems, "Print the fixture catalog and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    if (list_systems) {
        for (const auto& f : fixture_catalog()) std::cout << f.name << "\n    " << f.doc << '\n';
        return 0;
    }
    if (experiment.empty()) {
        std::cerr << "error: missing experiment (simulate, check-hypotheses, measure, entropy, quotient)\n";
        return kExitValidation;
    }

    ExperimentConfig cfg;
    try {
        const ExperimentKind kind = experiment_from_name(experiment);
        const std::optional<std::string> sys_override = system.empty() ? std::nullopt : std::optional(system);
        if (config_path.empty()) {
            cfg = default_config(kind, sys_override.value_or("annulus"));
        } else {
            cfg = load_config(config_path, kind, sys_override);
        }
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!grid.empty()) cfg.measure.grid = grid;
        if (!points.empty()) cfg.quotient.points_csv = points;
        validate_config(cfg);
    } catch (const PreconditionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        const RunResult res = run_experiment(cfg);
        for (const auto& f : res.files) std::cout << f.string() << '\n';
        std::cout << res.summary_json << '\n';
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const PreconditionError& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
