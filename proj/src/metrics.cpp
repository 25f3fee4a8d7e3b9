#include "niuq/cli/metrics.hpp"

#include <cmath>

namespace niuq::cli {

double relative_l2(const std::vector<double>& pred, const std::vector<double>& ref) {
    if (pred.size() != ref.size() || ref.empty())
        throw ShapeError("relative_l2: mismatched evaluation grids");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (pred[i] - ref[i]) * (pred[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    if (den == 0.0) throw InvalidInput("relative_l2: zero-norm reference");
    return std::sqrt(num / den);
}

double coverage(const std::vector<double>& mean, const std::vector<double>& std,
                const std::vector<double>& ref) {
    if (mean.size() != std.size() || mean.size() != ref.size() || mean.empty())
        throw ShapeError("coverage: mismatched evaluation grids");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < mean.size(); ++i)
        if (std::abs(mean[i] - ref[i]) <= 2.0 * std[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(mean.size());
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw InvalidInput("linspace: need at least two points");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

}  // namespace niuq::cli
