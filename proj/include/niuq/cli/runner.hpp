#pragma once

#include <string>

#include "niuq/cli/config.hpp"
#include "niuq/cli/report.hpp"

namespace niuq::cli {

// Runs the configured experiment end to end: data generation, posterior
// sampling per mode, requested baselines, summary CSVs, SVG figures, and
// report.txt / report.json in the output directory. Partial artifacts are
// removed if the run fails.
RunReport run_experiment(const ExperimentConfig& cfg);

// Builds the solver corpus, trains the operator surrogate, and writes the
// checkpoint referenced by the config. Returns the test relative L2 error.
double train_operator_checkpoint(const ExperimentConfig& cfg);

// Deterministic PINN study for the forward Poisson problem.
struct PinnResult {
    double err_u = 0.0;
    double err_f = 0.0;
    double final_loss = 0.0;
};

// scenario: clean | noisy-output | noisy-input (noise scale cfg.pinn_noise).
PinnResult train_pinn_deterministic(const ExperimentConfig& cfg, const std::string& scenario,
                                    std::uint64_t seed);

}  // namespace niuq::cli
