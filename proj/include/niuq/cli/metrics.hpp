#pragma once

#include <vector>

#include "niuq/errors.hpp"

namespace niuq::cli {

// ||pred - ref||_2 / ||ref||_2 over the evaluation grid.
double relative_l2(const std::vector<double>& pred, const std::vector<double>& ref);

// Fraction of points where |mean - ref| <= 2 std.
double coverage(const std::vector<double>& mean, const std::vector<double>& std,
                const std::vector<double>& ref);

// n equally spaced points on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace niuq::cli
