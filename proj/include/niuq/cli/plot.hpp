#pragma once

#include <string>
#include <vector>

#include "niuq/errors.hpp"

namespace niuq::cli {

// One 1D uncertainty plot: reference curve, predicted mean, +/- 2 std band,
// and measurement scatter. All series share the x grid except the scatter.
struct PlotData {
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> std;        // may be empty (no band)
    std::vector<double> reference;  // may be empty (no reference curve)
    std::vector<double> scatter_x, scatter_y;
    std::string title, xlabel = "x", ylabel = "value";
};

// Standalone SVG, deterministic bytes for fixed inputs.
void emit_plot(const PlotData& data, const std::string& path);

}  // namespace niuq::cli
