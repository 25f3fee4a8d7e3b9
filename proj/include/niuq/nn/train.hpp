#pragma once

#include <cstdint>
#include <vector>

#include "niuq/nn/adam.hpp"
#include "niuq/nn/deeponet.hpp"

namespace niuq::nn {

// Operator-learning corpus: input function(s) per row on the sensor grid,
// target field per row on the evaluation coordinates.
struct OperatorDataset {
    std::vector<double> sensor_grid;
    std::vector<std::vector<double>> inputs;    // first input function per sample
    std::vector<std::vector<double>> inputs2;   // second input function (mio only), may be empty
    std::vector<std::vector<double>> eval_coords;  // one coordinate vector per target column
    std::vector<std::vector<double>> targets;   // per sample: one value per eval coordinate
};

struct TrainConfig {
    std::size_t iterations = 20000;
    std::size_t batch_functions = 16;
    std::size_t batch_points = 0;  // 0 = use all eval coordinates per batch
    AdamConfig adam = {};
    double lr_floor_fraction = 0.1;  // cosine decay from adam.lr down to this fraction
    std::uint64_t seed = 0;
};

// Minimizes MSE between operator predictions and solver-generated targets.
// test dataset supplies the recorded relative L2 error (may be empty).
OperatorModel train_operator(const NetworkSpec& spec, const OperatorDataset& train,
                             const OperatorDataset& test, const TrainConfig& cfg);

// Mean relative L2 error of the model over a dataset.
double operator_test_error(const OperatorModel& model, const OperatorDataset& data);

}  // namespace niuq::nn
