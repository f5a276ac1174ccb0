#pragma once
//
// Experiment runner: executes one subcommand against a resolved configuration
// and writes its artifacts (CSV data, summary.txt, config.resolved.json) into
// the output directory.
//
// Outputs are deterministic: identical config and build produce byte-identical
// files at any thread count.  Parallel sections run independent items into
// preassigned slots and reduce in index order; every float is printed with 17
// significant digits.
//
// Error contract: configuration problems throw ConfigError subclasses, solver
// and mesh problems throw their module errors; `validate` returns 4 when any
// check fails, everything else returns 0.

#include "vlab/config.hpp"

#include <string>

namespace vlab {

struct RunnerOptions {
    std::string out_dir; // already resolved (flag override applied)
    int threads = 1;     // worker cap, 1 = fully sequential reference mode
};

inline const char* const kSubcommands[] = {"mesh",   "renorm",     "solve", "stress",
                                           "stationary", "sweep", "validate"};

int run_subcommand(const ExperimentConfig& cfg, const std::string& subcommand,
                   const RunnerOptions& opts);

} // namespace vlab
