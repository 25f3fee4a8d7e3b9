#pragma once

#include "niuq/mcmc/hmc.hpp"
#include "niuq/nn/adam.hpp"

namespace niuq::mcmc {

struct MapResult {
    std::vector<double> params;
    double final_objective = 0.0;      // final -log posterior
    std::vector<double> objective_trace;  // every 10 iterations
};

// Adam minimization of the negative log posterior.
MapResult map_estimate(const LogDensity& logpost, const std::vector<double>& init,
                       const nn::AdamConfig& adam, std::size_t iterations);

}  // namespace niuq::mcmc
