#pragma once

#include <vector>

#include <Eigen/Dense>

#include "niuq/bayes/noise.hpp"
#include "niuq/mcmc/hmc.hpp"
#include "niuq/nn/deeponet.hpp"

namespace niuq::bayes {

// Measurements of a discretized input function at sensor-grid indices.
struct GridMeasurements {
    std::vector<std::size_t> indices;
    std::vector<double> values;
    double sigma = 1.0;
};

// Measurements of the output function at query coordinates.
struct OutputMeasurements {
    std::vector<std::vector<double>> coords;
    std::vector<double> values;
    double sigma = 1.0;
};

// Gaussian prior over a discretized function: mean and Cholesky factor.
struct FunctionPrior {
    std::vector<double> mean;
    Eigen::MatrixXd chol;
};

// Posterior over the discretization of the input function(s) of a pretrained
// neural operator:
//   p(v | D) ~ p(D_v | v) p(D_u | v) p(v)          (vanilla DeepONet)
//   p(k, f | D) ~ p(D_k|k) p(D_f|f) p(D_u|k,f) p(k) p(f)   (multi-input)
// Dropping the u-likelihood (or the v-likelihood) gives the non-synergistic
// posteriors used as a baseline.
//
// The sampler runs in whitened coordinates z with v = prior.mean +
// prior.chol * z, so the severely ill-conditioned function-space prior
// becomes a standard normal; fields_of maps draws back to function values.
struct OperatorPosterior {
    const nn::OperatorModel* model = nullptr;
    GridMeasurements v_data;              // first input function
    GridMeasurements w_data;              // second input function (mio only)
    OutputMeasurements u_data;
    FunctionPrior v_prior;
    FunctionPrior w_prior;                // mio only
    bool include_u_likelihood = true;     // false: non-synergistic input reconstruction
    bool include_input_likelihood = true; // false: posterior from u-data alone

    bool mio() const { return model->spec.kind == nn::NetworkKind::MioDeepONet; }
    std::size_t grid_size() const { return model->sensor_grid.size(); }
    std::size_t dim() const { return mio() ? 2 * grid_size() : grid_size(); }

    void validate() const;
    std::vector<std::string> param_names() const;
    // Whitened prior mean (all zeros) as the initial point.
    std::vector<double> initial_point() const;

    // Maps a whitened draw to function values [v | w].
    std::vector<double> fields_of(const std::vector<double>& q) const;

    double logpost(const std::vector<double>& q, std::vector<double>* grad) const;
    mcmc::LogDensity density() const;

    // Output-function prediction for one draw at one coordinate.
    double predict_u(const std::vector<double>& q, const std::vector<double>& coord) const;
};

}  // namespace niuq::bayes
