#include "niuq/bayes/summary.hpp"

#include <cmath>

namespace niuq::bayes {

FieldSummary predict_summary(
    const mcmc::PosteriorSamples& samples,
    const std::function<std::vector<double>(const std::vector<double>&)>& predictor) {
    const std::size_t m = samples.draws.size();
    if (m < 2) throw InvalidInput("predict_summary: need at least 2 samples");
    FieldSummary out;
    std::vector<std::vector<double>> fields;
    fields.reserve(m);
    for (const auto& draw : samples.draws) fields.push_back(predictor(draw));
    const std::size_t n = fields[0].size();
    out.mean.assign(n, 0.0);
    out.std.assign(n, 0.0);
    for (const auto& f : fields)
        for (std::size_t i = 0; i < n; ++i) out.mean[i] += f[i];
    for (auto& v : out.mean) v /= static_cast<double>(m);
    for (const auto& f : fields)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = f[i] - out.mean[i];
            out.std[i] += d * d;
        }
    for (auto& v : out.std) v = std::sqrt(v / static_cast<double>(m));
    return out;
}

}  // namespace niuq::bayes
