#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "niuq/errors.hpp"

namespace niuq::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m, v;
    long t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Standard Adam update with bias correction, in place.
inline void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
                      const AdamConfig& cfg = {}) {
    if (grad.size() != params.size()) throw ShapeError("adam_step: gradient length mismatch");
    if (state.m.size() != params.size()) state = AdamState(params.size());
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericOverflow("adam_step: non-finite gradient");
    state.t += 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace niuq::nn
