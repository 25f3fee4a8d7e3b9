#include "niuq/mcmc/hmc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "niuq/rng.hpp"

namespace niuq::mcmc {

std::vector<double> PosteriorSamples::mean() const {
    std::vector<double> m(dim(), 0.0);
    for (const auto& row : draws)
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += row[i];
    for (auto& v : m) v /= static_cast<double>(draws.size());
    return m;
}

std::vector<double> PosteriorSamples::variance() const {
    auto m = mean();
    std::vector<double> var(dim(), 0.0);
    for (const auto& row : draws)
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double d = row[i] - m[i];
            var[i] += d * d;
        }
    for (auto& v : var) v /= static_cast<double>(draws.size());
    return var;
}

bool leapfrog(const LogDensity& logpost, std::vector<double>& q, std::vector<double>& p,
              std::vector<double>& grad, double& logp, double step_size, std::size_t steps,
              const std::vector<double>& inv_mass) {
    const std::size_t dim = q.size();
    for (std::size_t i = 0; i < dim; ++i) p[i] += 0.5 * step_size * grad[i];
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < dim; ++i) q[i] += step_size * p[i] * inv_mass[i];
        logp = logpost(q, grad);
        if (!std::isfinite(logp)) return false;
        const double scale = (s + 1 == steps) ? 0.5 : 1.0;
        for (std::size_t i = 0; i < dim; ++i) p[i] += scale * step_size * grad[i];
    }
    return true;
}

double adapt_step_size(double step_size, bool accepted, std::size_t t) {
    const double gain = 1.0 / std::pow(static_cast<double>(t) + 10.0, 0.6);
    const double a = accepted ? 1.0 : 0.0;
    return step_size * std::exp(gain * (a - 0.6));
}

namespace {

struct Hamiltonian {
    const LogDensity& logpost;
    const std::vector<double>& inv_mass;  // 1/m per coordinate (all 1 for identity)

    double kinetic(const std::vector<double>& p) const {
        double k = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) k += 0.5 * p[i] * p[i] * inv_mass[i];
        return k;
    }
};

}  // namespace

PosteriorSamples hmc_sample(const LogDensity& logpost, const std::vector<double>& init,
                            const HmcConfig& cfg) {
    cfg.validate();
    const std::size_t dim = init.size();
    std::vector<double> inv_mass(dim, 1.0), mass_std(dim, 1.0);
    if (!cfg.mass.empty()) {
        if (cfg.mass.size() != dim) throw InvalidInput("hmc: mass vector length mismatch");
        for (std::size_t i = 0; i < dim; ++i) {
            inv_mass[i] = 1.0 / cfg.mass[i];
            mass_std[i] = std::sqrt(cfg.mass[i]);
        }
    }

    std::vector<double> q = init, grad(dim);
    double logp = logpost(q, grad);
    if (!std::isfinite(logp)) throw InvalidInit("hmc: log-posterior not finite at init");

    Hamiltonian ham{logpost, inv_mass};
    Rng rng(cfg.seed);
    double eps = cfg.step_size;

    PosteriorSamples out;
    out.draws.reserve(cfg.num_samples);

    std::vector<double> p(dim), q_prop(dim), grad_prop(dim);
    std::size_t bad_proposals = 0, accepted_after = 0;

    const std::size_t total = cfg.burn_in + cfg.num_samples;
    for (std::size_t it = 0; it < total; ++it) {
        const bool burn = it < cfg.burn_in;
        for (std::size_t i = 0; i < dim; ++i) p[i] = mass_std[i] * rng.normal();
        const double h0 = -logp + ham.kinetic(p);

        q_prop = q;
        grad_prop = grad;
        double logp_prop = logp;
        std::vector<double> pp = p;
        const bool finite =
            leapfrog(logpost, q_prop, pp, grad_prop, logp_prop, eps, cfg.leapfrog_steps, inv_mass);

        bool accept = false;
        if (finite) {
            const double h1 = -logp_prop + ham.kinetic(pp);
            const double dh = h1 - h0;
            // divergence guard: huge Hamiltonian error is auto-rejected
            if (std::isfinite(dh) && dh < 1000.0)
                accept = std::log(rng.uniform()) < -dh;
        } else {
            ++bad_proposals;
        }

        if (accept) {
            q = q_prop;
            grad = grad_prop;
            logp = logp_prop;
        }

        if (burn) {
            if (cfg.adapt) eps = adapt_step_size(eps, accept, it);
            if (it + 1 == cfg.burn_in && cfg.burn_in > 0 &&
                bad_proposals > (9 * cfg.burn_in) / 10)
                throw SamplerStuck("hmc: >90% of burn-in proposals were non-finite");
        } else {
            out.draws.push_back(q);
            out.accepted.push_back(accept);
            out.logpost_trace.push_back(logp);
            if (accept) ++accepted_after;
        }
    }

    out.acceptance_rate = static_cast<double>(accepted_after) / static_cast<double>(cfg.num_samples);
    out.adapted_step_size = eps;
    return out;
}

void export_samples(const PosteriorSamples& samples, const std::vector<std::string>& names,
                    const std::string& csv_path, const std::string& sidecar_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path);
    for (std::size_t i = 0; i < names.size(); ++i) csv << (i ? "," : "") << names[i];
    csv << "\n";
    char buf[32];
    for (const auto& row : samples.draws) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            csv << (i ? "," : "") << buf;
        }
        csv << "\n";
    }
    nlohmann::json j;
    j["num_samples"] = samples.draws.size();
    j["acceptance_rate"] = samples.acceptance_rate;
    j["adapted_step_size"] = samples.adapted_step_size;
    std::ofstream side(sidecar_path);
    if (!side) throw IoError("cannot write " + sidecar_path);
    side << j.dump(1) << "\n";
}

}  // namespace niuq::mcmc
