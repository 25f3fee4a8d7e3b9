#pragma once

#include <span>
#include <string>
#include <vector>

#include "niuq/ad/tape.hpp"
#include "niuq/nn/spec.hpp"

namespace niuq::nn {

// Pretrained operator surrogate: network, weights, sensor grid, training metadata.
struct OperatorModel {
    NetworkSpec spec;
    ParamVector params;
    std::vector<double> sensor_grid;  // input functions are sampled on exactly this grid
    double test_rel_l2 = 0.0;
    std::vector<double> loss_history;
    std::uint64_t train_seed = 0;
    std::size_t train_iterations = 0;
};

// G(v)(x) = sum_k branch_k(v) * trunk_k(x) + bias.
double deeponet_forward(const OperatorModel& model, std::span<const double> v,
                        std::span<const double> x);

// Multi-input variant: sum_k branch1_k(k) * branch2_k(f) * trunk_k(x) + bias.
double mio_deeponet_forward(const OperatorModel& model, std::span<const double> k,
                            std::span<const double> f, std::span<const double> x);

// Trunk features at a fixed coordinate (plain doubles; the trunk does not
// depend on the sampled input function, so it can be precomputed per query).
std::vector<double> trunk_features(const OperatorModel& model, std::span<const double> x);

// Tape evaluation with the input function as tape scalars, trunk precomputed.
ad::Var deeponet_forward_var(const OperatorModel& model, std::span<const ad::Var> v,
                             std::span<const double> trunk_feat);
ad::Var mio_deeponet_forward_var(const OperatorModel& model, std::span<const ad::Var> k,
                                 std::span<const ad::Var> f, std::span<const double> trunk_feat);

}  // namespace niuq::nn
