#pragma once

#include <vector>

#include "niuq/bayes/noise.hpp"
#include "niuq/mcmc/hmc.hpp"
#include "niuq/nn/mlp.hpp"

namespace niuq::bayes {

// One observation channel for the Poisson B-PINN: coordinates and values,
// with known noise scales.
struct PointData {
    std::vector<double> x, y;
    ChannelNoise noise;

    std::size_t size() const { return x.size(); }
    bool noisy_input() const { return noise.sigma_in.has_value(); }
};

// Joint posterior of the 1D nonlinear Poisson problem
//   kappa u'' - lambda u^3 = f,  u(0) = u(1) = 1 (hard-encoded),
// over network parameters, optional latent coordinates, and an optional
// latent log(lambda).
struct PoissonBpinnPosterior {
    nn::MlpSpec net;  // scalar-to-scalar
    PointData u_data;  // may be empty (forward problem)
    PointData f_data;
    InferenceMode mode = InferenceMode::ModelInputNoise;
    double kappa = 0.01;
    double lambda = 0.1;        // used when !infer_lambda
    bool infer_lambda = false;  // lambda = exp(ell), ell ~ N(0, 1)
    double theta_prior_std = 1.0;
    double chi_prior_std = 100.0;
    bool flat_chi_prior = false;
    double bc_left = 1.0, bc_right = 1.0;

    std::size_t theta_dim() const { return net.param_count(); }
    std::size_t latent_u() const {
        return mode == InferenceMode::ModelInputNoise && u_data.noisy_input() ? u_data.size() : 0;
    }
    std::size_t latent_f() const {
        return mode == InferenceMode::ModelInputNoise && f_data.noisy_input() ? f_data.size() : 0;
    }
    std::size_t dim() const { return theta_dim() + latent_u() + latent_f() + (infer_lambda ? 1 : 0); }

    // Layout: [theta | chi_u | chi_f | log_lambda].
    std::vector<std::string> param_names() const;
    std::vector<double> initial_point(std::uint64_t seed) const;

    // Diagonal HMC mass: unit for theta and log_lambda, 1/sigma_in^2 for the
    // latent coordinates of each noisy-input channel.
    std::vector<double> mass_diagonal() const;

    double logpost(const std::vector<double>& q, std::vector<double>* grad) const;
    mcmc::LogDensity density() const;

    // Surrogate and residual evaluation for one posterior draw.
    double predict_u(const std::vector<double>& q, double x) const;
    double predict_f(const std::vector<double>& q, double x) const;
    double lambda_of(const std::vector<double>& q) const;
};

}  // namespace niuq::bayes
