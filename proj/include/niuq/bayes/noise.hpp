#pragma once

#include <optional>
#include <string>

#include "niuq/errors.hpp"

namespace niuq::bayes {

// Known noise scales per channel. An absent input scale means the channel's
// inputs are observed without noise.
struct ChannelNoise {
    std::optional<double> sigma_in;
    double sigma_out = 0.0;

    void validate() const {
        if (sigma_in && *sigma_in <= 0.0) throw InvalidInput("noise: sigma_in must be > 0");
        if (sigma_out < 0.0) throw InvalidInput("noise: sigma_out must be >= 0");
    }
};

enum class InferenceMode { IgnoreInputNoise, ModelInputNoise, RecastTaylor };

inline std::string to_string(InferenceMode m) {
    switch (m) {
        case InferenceMode::IgnoreInputNoise: return "ignore";
        case InferenceMode::ModelInputNoise: return "model";
        default: return "recast";
    }
}

inline InferenceMode mode_from_string(const std::string& s) {
    if (s == "ignore") return InferenceMode::IgnoreInputNoise;
    if (s == "model") return InferenceMode::ModelInputNoise;
    if (s == "recast") return InferenceMode::RecastTaylor;
    throw InvalidInput("unknown inference mode: " + s);
}

}  // namespace niuq::bayes
