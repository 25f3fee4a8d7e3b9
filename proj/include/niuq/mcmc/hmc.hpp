#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "niuq/errors.hpp"

namespace niuq::mcmc {

// Log-density with gradient. Returns log p(x); fills grad (same length as x).
using LogDensity = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct HmcConfig {
    std::size_t leapfrog_steps = 50;
    std::size_t num_samples = 1000;
    std::size_t burn_in = 1000;
    double step_size = 0.1;
    double target_lo = 0.5;
    double target_hi = 0.7;
    std::vector<double> mass;  // empty = identity; else diagonal
    std::uint64_t seed = 0;
    bool adapt = true;

    void validate() const {
        if (leapfrog_steps < 1 || num_samples < 1) throw InvalidInput("hmc: L >= 1, M >= 1 required");
        if (!(0.0 < target_lo && target_lo < target_hi && target_hi < 1.0))
            throw InvalidInput("hmc: need 0 < lo < hi < 1");
    }
};

struct PosteriorSamples {
    std::vector<std::vector<double>> draws;  // M rows, no burn-in retained
    std::vector<bool> accepted;              // per retained iteration
    double acceptance_rate = 0.0;            // post-burn-in
    double adapted_step_size = 0.0;
    std::vector<double> logpost_trace;       // per retained iteration

    std::size_t dim() const { return draws.empty() ? 0 : draws[0].size(); }

    std::vector<double> mean() const;
    std::vector<double> variance() const;  // population variance
};

// One leapfrog trajectory of L steps, in place. grad/logp must hold the state
// at q on entry and hold the state at the final q on exit. Returns false if a
// non-finite log-density was hit (q, p are then unusable).
bool leapfrog(const LogDensity& logpost, std::vector<double>& q, std::vector<double>& p,
              std::vector<double>& grad, double& logp, double step_size, std::size_t steps,
              const std::vector<double>& inv_mass);

// Robbins-Monro update on the log step size, targeting acceptance 0.6.
// t is the 0-based burn-in iteration index.
double adapt_step_size(double step_size, bool accepted, std::size_t t);

// Standard HMC: momentum resampled per iteration, L leapfrog steps,
// Metropolis accept/reject on the Hamiltonian. Step size adapted during
// burn-in only, frozen afterwards.
PosteriorSamples hmc_sample(const LogDensity& logpost, const std::vector<double>& init,
                            const HmcConfig& cfg);

// Writes one row per draw to CSV (header from names) plus a JSON sidecar with
// acceptance statistics and the adapted step size.
void export_samples(const PosteriorSamples& samples, const std::vector<std::string>& names,
                    const std::string& csv_path, const std::string& sidecar_path);

}  // namespace niuq::mcmc
