#pragma once

#include <span>
#include <vector>

#include "niuq/ad/jet.hpp"
#include "niuq/nn/spec.hpp"
#include "niuq/rng.hpp"

namespace niuq::nn {

// Plain forward pass: affine + activation per hidden layer, final layer affine.
std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> x);

// Activation caches for backprop. act[0] is the input; act.back() the output.
struct MlpCache {
    std::vector<std::vector<double>> pre;  // pre-activation per non-input layer
    std::vector<std::vector<double>> act;  // post-activation per layer
};

std::vector<double> mlp_forward_cached(const MlpSpec& spec, std::span<const double> params,
                                       std::span<const double> x, MlpCache& cache);

// Accumulates dL/dparams into grad (same length as params) given dL/doutput.
// Returns dL/dinput.
std::vector<double> mlp_backward(const MlpSpec& spec, std::span<const double> params,
                                 const MlpCache& cache, std::span<const double> dout,
                                 std::span<double> grad);

// Forward pass on a tape. Parameters and inputs are tape scalars.
std::vector<ad::Var> mlp_var_forward(const MlpSpec& spec, std::span<const ad::Var> params,
                                     std::span<const ad::Var> x);

// Scalar-input scalar-output forward propagating a third-order jet,
// recording the whole computation for the reverse sweep.
ad::Jet3 mlp_jet_forward(const MlpSpec& spec, std::span<const ad::Var> params, const ad::Jet3& x);

// Convenience overload building its own leaves; returns the jet of u(x).
ad::Jet3 mlp_jet_forward(ad::Tape& tape, const MlpSpec& spec, const ParamVector& params, double x);

// M stochastic forward passes with inverted-dropout Bernoulli masks on hidden
// units. rate in [0, 1).
std::vector<std::vector<double>> dropout_predict(const MlpSpec& spec, std::span<const double> params,
                                                 std::span<const double> x, double rate,
                                                 std::size_t num_samples, std::uint64_t seed);

// One training forward/backward with dropout masks (used by the dropout baseline).
std::vector<double> mlp_forward_dropout_cached(const MlpSpec& spec, std::span<const double> params,
                                               std::span<const double> x, double rate, Rng& rng,
                                               MlpCache& cache,
                                               std::vector<std::vector<double>>& masks);
std::vector<double> mlp_backward_dropout(const MlpSpec& spec, std::span<const double> params,
                                         const MlpCache& cache,
                                         const std::vector<std::vector<double>>& masks,
                                         std::span<const double> dout, std::span<double> grad);

}  // namespace niuq::nn
