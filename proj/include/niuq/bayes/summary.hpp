#pragma once

#include <functional>
#include <vector>

#include "niuq/errors.hpp"
#include "niuq/mcmc/hmc.hpp"

namespace niuq::bayes {

struct FieldSummary {
    std::vector<double> mean;
    std::vector<double> std;  // population standard deviation
};

// Pointwise predictive mean and std of predictor(draw) over the retained
// samples. The uncertainty band is mean +/- 2 std.
FieldSummary predict_summary(
    const mcmc::PosteriorSamples& samples,
    const std::function<std::vector<double>(const std::vector<double>&)>& predictor);

}  // namespace niuq::bayes
