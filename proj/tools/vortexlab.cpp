// vortexlab — command-line front end for the vortex laboratory.
//
// usage: vortexlab SUBCOMMAND --config FILE [--out DIR] [--threads N] [--seed N]
//
// exit codes: 0 success, 2 configuration error, 3 solver/mesh failure,
//             4 validation check failure.

#include "vlab/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for planar vortex maps"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 1;
    std::int64_t seed = -1;
    app.add_option("--config", config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads for independent items")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "override the config RNG seed");

    std::string chosen;
    for (const char* name : vlab::kSubcommands) {
        auto* sub = app.add_subcommand(name, "");
        sub->fallthrough();
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        vlab::ExperimentConfig cfg = vlab::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = (std::uint64_t)seed;
        vlab::RunnerOptions opts;
        opts.out_dir = cfg.out_dir;
        opts.threads = threads;
        return vlab::run_subcommand(cfg, chosen, opts);
    } catch (const vlab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
