#include "niuq/bayes/regression.hpp"

#include <cmath>

#include "niuq/bayes/mvn.hpp"

namespace niuq::bayes {

using ad::Jet3;
using ad::Tape;
using ad::Var;

std::vector<std::string> RegressionPosterior::param_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < theta_dim(); ++i) names.push_back("theta[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < latent_dim(); ++i) names.push_back("chi[" + std::to_string(i) + "]");
    return names;
}

std::vector<double> RegressionPosterior::initial_point(std::uint64_t seed) const {
    Rng rng(seed);
    nn::NetworkSpec spec;
    spec.kind = nn::NetworkKind::Mlp;
    spec.mlp = net;
    std::vector<double> q = nn::init_params(spec, rng).data;
    for (std::size_t i = 0; i < latent_dim(); ++i) q.push_back(x_obs[i]);
    return q;
}

double RegressionPosterior::logpost(const std::vector<double>& q, std::vector<double>* grad) const {
    noise.validate();
    if (q.size() != dim()) throw InvalidInput("regression logpost: latent/mode mismatch");
    if (x_obs.size() != y_obs.size()) throw ShapeError("regression logpost: data size mismatch");
    const bool noisy_in = noise.sigma_in.has_value();

    thread_local Tape tape(1 << 18);
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(q.size());
    for (double v : q) leaves.push_back(tape.leaf(v));
    std::span<const Var> theta(leaves.data(), theta_dim());

    Var lp = tape.zero();
    const double so = noise.sigma_out;
    for (std::size_t i = 0; i < x_obs.size(); ++i) {
        switch (mode) {
            case InferenceMode::IgnoreInputNoise: {
                Var x = tape.constant(x_obs[i]);
                Var h = nn::mlp_var_forward(net, theta, std::span<const Var>(&x, 1))[0];
                lp = lp + normal_logpdf_residual(h - y_obs[i], so);
                break;
            }
            case InferenceMode::ModelInputNoise: {
                if (!noisy_in) {
                    // no input noise: no latent coordinate, ignore-mode term
                    Var x = tape.constant(x_obs[i]);
                    Var h = nn::mlp_var_forward(net, theta, std::span<const Var>(&x, 1))[0];
                    lp = lp + normal_logpdf_residual(h - y_obs[i], so);
                    break;
                }
                Var chi = leaves[theta_dim() + i];
                Var h = nn::mlp_var_forward(net, theta, std::span<const Var>(&chi, 1))[0];
                lp = lp + normal_logpdf_residual(h - y_obs[i], so);
                lp = lp + normal_logpdf_residual(chi - x_obs[i], *noise.sigma_in);
                if (!flat_chi_prior) lp = lp + normal_logpdf(chi, 0.0, chi_prior_std);
                break;
            }
            case InferenceMode::RecastTaylor: {
                if (!noisy_in) {
                    // no input noise: degenerates to the ignore-mode term
                    Var x = tape.constant(x_obs[i]);
                    Var h = nn::mlp_var_forward(net, theta, std::span<const Var>(&x, 1))[0];
                    lp = lp + normal_logpdf_residual(h - y_obs[i], so);
                    break;
                }
                Jet3 x = ad::jet_lift_input(tape, x_obs[i]);
                Jet3 h = nn::mlp_jet_forward(net, theta, x);
                const double si = *noise.sigma_in;
                Var variance = square(h.d1) * (si * si) + (so * so);
                lp = lp + normal_logpdf_residual_var(h.v - y_obs[i], variance);
                break;
            }
        }
    }
    for (std::size_t i = 0; i < theta_dim(); ++i)
        lp = lp + normal_logpdf(leaves[i], 0.0, theta_prior_std);

    const double value = lp.val();
    if (grad) {
        tape.reverse(lp);
        grad->resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) (*grad)[i] = tape.adjoint(leaves[i]);
    }
    return value;
}

mcmc::LogDensity RegressionPosterior::density() const {
    return [this](const std::vector<double>& q, std::vector<double>& grad) {
        return logpost(q, &grad);
    };
}

double RegressionPosterior::predict(const std::vector<double>& q, double x) const {
    std::span<const double> theta(q.data(), theta_dim());
    return nn::mlp_forward(net, theta, std::span<const double>(&x, 1))[0];
}

}  // namespace niuq::bayes

namespace niuq::bayes {

std::vector<double> RegressionPosterior::mass_diagonal() const {
    std::vector<double> m(dim(), 1.0);
    if (latent_dim() > 0) {
        const double s = *noise.sigma_in;
        for (std::size_t i = theta_dim(); i < dim(); ++i) m[i] = 1.0 / (s * s);
    }
    return m;
}

}  // namespace niuq::bayes
