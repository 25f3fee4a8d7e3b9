#include "niuq/mcmc/map.hpp"

#include <cmath>

namespace niuq::mcmc {

MapResult map_estimate(const LogDensity& logpost, const std::vector<double>& init,
                       const nn::AdamConfig& adam, std::size_t iterations) {
    MapResult res;
    res.params = init;
    std::vector<double> grad(init.size()), neg_grad(init.size());
    nn::AdamState state(init.size());
    double obj = -logpost(res.params, grad);
    if (!std::isfinite(obj)) throw InvalidInit("map_estimate: objective not finite at init");
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < grad.size(); ++i) neg_grad[i] = -grad[i];
        nn::adam_step(res.params, neg_grad, state, adam);
        obj = -logpost(res.params, grad);
        if (!std::isfinite(obj)) throw TrainingDiverged("map_estimate: objective became non-finite");
        if (it % 10 == 0) res.objective_trace.push_back(obj);
    }
    res.final_objective = obj;
    return res;
}

}  // namespace niuq::mcmc
