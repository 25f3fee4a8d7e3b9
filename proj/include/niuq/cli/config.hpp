#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "niuq/bayes/noise.hpp"
#include "niuq/errors.hpp"
#include "niuq/mcmc/hmc.hpp"

namespace niuq::cli {

enum class ExperimentId {
    E1Regression,
    E2PoissonForward,
    E3PoissonInverse,
    E4RdConstantOperator,
    E5RdHeteroOperator,
};

std::string to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& s);

// section -> key -> raw value.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

// INI-style document: [section] headers, key = value lines, # comments.
ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

// Fully resolved experiment description. Every field has an experiment-
// specific default and is overridable from the config document.
struct ExperimentConfig {
    ExperimentId experiment = ExperimentId::E1Regression;
    std::vector<bayes::InferenceMode> modes;
    std::vector<std::string> baselines;  // map | dropout | non-synergistic | misspecified
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // scalar surrogate network (E1-E3)
    std::size_t hidden_layers = 2;
    std::size_t hidden_width = 50;

    // priors
    double theta_prior_std = 1.0;
    double chi_prior_std = 100.0;

    // datasets (E1-E3)
    std::size_t n_u = 0;  // E1: number of regression observations
    std::size_t n_f = 51;
    double sigma_in_u = 0.0, sigma_out_u = 0.0;
    double sigma_in_f = 0.0, sigma_out_f = 0.0;
    std::uint64_t data_seed = 1;

    // Poisson physics (E2/E3)
    double kappa = 0.01;
    double lambda = 0.1;       // forward-model value when lambda is not inferred
    double lambda_true = 0.15;  // data-generating value for the inverse problem

    mcmc::HmcConfig hmc;

    // baselines
    double dropout_rate = 0.02;
    std::size_t dropout_passes = 1000;
    std::size_t dropout_train_iterations = 5000;
    double dropout_lr = 1e-2;
    std::size_t map_iterations = 5000;
    double map_lr = 1e-2;
    double misspecified_sigma_in = 0.01;

    // deterministic PINN study (E2 physics)
    std::size_t pinn_iterations = 6000;
    double pinn_lr = 5e-3;
    double pinn_weight_decay = 1e-5;
    double pinn_noise_in = 0.01;
    double pinn_noise_out = 0.05;

    // operator experiments (E4/E5)
    std::string checkpoint_path;
    bool train_first = false;
    std::size_t corpus_train = 200;
    std::size_t corpus_test = 32;
    std::size_t grid_n = 100;
    std::size_t latent_p = 50;
    std::size_t branch_width = 64;
    std::size_t trunk_width = 64;
    std::size_t train_iterations = 20000;
    std::size_t batch_functions = 8;
    std::size_t batch_points = 0;
    double train_lr = 1e-3;
    std::size_t meas_k = 2, meas_f = 6, meas_u = 3;
    double meas_sigma_k = 0.05, meas_sigma_f = 0.2, meas_sigma_u = 0.05;
    double grf_length = 0.2;
    std::uint64_t truth_seed = 7;
};

// Experiment-specific defaults.
ExperimentConfig default_config(ExperimentId id);

// Overlay parsed key-value pairs onto the defaults. Unknown keys -> InvalidInput.
void apply_overrides(ExperimentConfig& cfg, const ConfigMap& doc);

// defaults + file overrides (file must set run.experiment).
ExperimentConfig load_experiment_config(const std::string& path);

// Deterministic full serialization; re-parsing it reproduces the config.
std::string canonical_config_text(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace niuq::cli
