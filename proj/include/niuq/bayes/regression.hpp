#pragma once

#include <memory>
#include <vector>

#include "niuq/bayes/noise.hpp"
#include "niuq/mcmc/hmc.hpp"
#include "niuq/nn/mlp.hpp"

namespace niuq::bayes {

// Errors-in-variables regression posterior over the parameters of a
// scalar-to-scalar MLP surrogate, with the input noise either ignored,
// modeled through latent inputs, or recast as heteroscedastic output noise.
struct RegressionPosterior {
    nn::MlpSpec net;
    std::vector<double> x_obs, y_obs;
    ChannelNoise noise;
    InferenceMode mode = InferenceMode::IgnoreInputNoise;
    double theta_prior_std = 1.0;
    double chi_prior_std = 100.0;
    bool flat_chi_prior = false;  // drop p(chi) (uniform on a large interval)

    std::size_t theta_dim() const { return net.param_count(); }
    std::size_t latent_dim() const {
        return mode == InferenceMode::ModelInputNoise && noise.sigma_in ? x_obs.size() : 0;
    }
    std::size_t dim() const { return theta_dim() + latent_dim(); }

    // Parameter vector layout: [theta | chi_latent].
    std::vector<std::string> param_names() const;

    // theta from a seeded standard init; latent inputs at their observations.
    std::vector<double> initial_point(std::uint64_t seed) const;

    // Diagonal HMC mass: unit for theta, 1/sigma_in^2 for the latent inputs,
    // which equalizes the per-coordinate scales of the posterior.
    std::vector<double> mass_diagonal() const;

    double logpost(const std::vector<double>& q, std::vector<double>* grad) const;
    mcmc::LogDensity density() const;

    // Posterior-predictive evaluation of the surrogate at x for one draw.
    double predict(const std::vector<double>& q, double x) const;
};

}  // namespace niuq::bayes
