#include "niuq/bayes/bpinn.hpp"

#include <cmath>
#include <limits>

#include "niuq/bayes/mvn.hpp"

namespace niuq::bayes {

using ad::Jet3;
using ad::Tape;
using ad::Var;

namespace {

// Hard boundary encoding: u(x) = x(1-x) N(x) + (1-x) u0 + x u1.
Jet3 hard_bc_u(const nn::MlpSpec& net, std::span<const Var> theta, const Jet3& x, double u0,
               double u1) {
    Jet3 raw = nn::mlp_jet_forward(net, theta, x);
    Jet3 bump = ad::jet_mul(x, ad::jet_affine(x, -1.0, 1.0));  // x (1 - x)
    Jet3 lin = ad::jet_add(ad::jet_affine(x, -u0, u0), ad::jet_scale(x, u1));
    return ad::jet_add(ad::jet_mul(bump, raw), lin);
}

struct Residuals {
    Var u;        // u(x)
    Var du;       // u'(x)
    Var f;        // kappa u'' - lambda u^3
    Var df;       // d/dx of f
};

Residuals poisson_terms(const nn::MlpSpec& net, std::span<const Var> theta, const Jet3& x,
                        double kappa, Var lambda, double u0, double u1) {
    Jet3 u = hard_bc_u(net, theta, x, u0, u1);
    Var u3 = u.v * square(u.v);
    Var f = kappa * u.d2 - lambda * u3;
    Var df = kappa * u.d3 - lambda * (3.0 * (square(u.v) * u.d1));
    return {u.v, u.d1, f, df};
}

}  // namespace

std::vector<std::string> PoissonBpinnPosterior::param_names() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < theta_dim(); ++i) names.push_back("theta[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < latent_u(); ++i) names.push_back("chi_u[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < latent_f(); ++i) names.push_back("chi_f[" + std::to_string(i) + "]");
    if (infer_lambda) names.push_back("log_lambda");
    return names;
}

std::vector<double> PoissonBpinnPosterior::initial_point(std::uint64_t seed) const {
    Rng rng(seed);
    nn::NetworkSpec spec;
    spec.kind = nn::NetworkKind::Mlp;
    spec.mlp = net;
    std::vector<double> q = nn::init_params(spec, rng).data;
    for (std::size_t i = 0; i < latent_u(); ++i) q.push_back(u_data.x[i]);
    for (std::size_t i = 0; i < latent_f(); ++i) q.push_back(f_data.x[i]);
    if (infer_lambda) q.push_back(0.0);
    return q;
}

double PoissonBpinnPosterior::logpost(const std::vector<double>& q,
                                      std::vector<double>* grad) const {
    if (q.size() != dim()) throw InvalidInput("bpinn logpost: latent/mode mismatch");
    u_data.noise.validate();
    f_data.noise.validate();

    thread_local Tape tape(1 << 20);
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(q.size());
    for (double v : q) leaves.push_back(tape.leaf(v));
    std::span<const Var> theta(leaves.data(), theta_dim());

    Var lambda_var = infer_lambda ? exp(leaves.back()) : tape.constant(lambda);
    Var lp = tape.zero();

    // channel = 0 for u-data, 1 for f-data
    auto add_channel = [&](const PointData& data, std::size_t latent_offset,
                           bool is_f) -> bool {
        const double so = data.noise.sigma_out;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const bool latent = mode == InferenceMode::ModelInputNoise && data.noisy_input();
            Jet3 x = latent ? ad::jet_seed(leaves[latent_offset + i])
                            : ad::jet_lift_input(tape, data.x[i]);
            Residuals r = poisson_terms(net, theta, x, kappa, lambda_var, bc_left, bc_right);
            Var h = is_f ? r.f : r.u;
            if (!std::isfinite(h.val())) return false;  // let the sampler reject
            if (mode == InferenceMode::RecastTaylor && data.noisy_input()) {
                Var dh = is_f ? r.df : r.du;
                const double si = *data.noise.sigma_in;
                Var variance = square(dh) * (si * si) + (so * so);
                lp = lp + normal_logpdf_residual_var(h - data.y[i], variance);
            } else {
                lp = lp + normal_logpdf_residual(h - data.y[i], so);
            }
            if (latent) {
                Var chi = leaves[latent_offset + i];
                lp = lp + normal_logpdf_residual(chi - data.x[i], *data.noise.sigma_in);
                if (!flat_chi_prior) lp = lp + normal_logpdf(chi, 0.0, chi_prior_std);
            }
        }
        return true;
    };
    if (!add_channel(u_data, theta_dim(), false) ||
        !add_channel(f_data, theta_dim() + latent_u(), true)) {
        if (grad) grad->assign(q.size(), 0.0);
        return -std::numeric_limits<double>::infinity();
    }

    for (std::size_t i = 0; i < theta_dim(); ++i)
        lp = lp + normal_logpdf(leaves[i], 0.0, theta_prior_std);
    if (infer_lambda) lp = lp + normal_logpdf(leaves.back(), 0.0, 1.0);

    const double value = lp.val();
    if (grad) {
        tape.reverse(lp);
        grad->resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) (*grad)[i] = tape.adjoint(leaves[i]);
    }
    return value;
}

mcmc::LogDensity PoissonBpinnPosterior::density() const {
    return [this](const std::vector<double>& q, std::vector<double>& grad) {
        return logpost(q, &grad);
    };
}

double PoissonBpinnPosterior::lambda_of(const std::vector<double>& q) const {
    return infer_lambda ? std::exp(q[dim() - 1]) : lambda;
}

double PoissonBpinnPosterior::predict_u(const std::vector<double>& q, double x) const {
    std::span<const double> theta(q.data(), theta_dim());
    const double raw = nn::mlp_forward(net, theta, std::span<const double>(&x, 1))[0];
    return x * (1.0 - x) * raw + (1.0 - x) * bc_left + x * bc_right;
}

double PoissonBpinnPosterior::predict_f(const std::vector<double>& q, double x) const {
    Tape tape(1 << 14);
    std::vector<Var> theta;
    theta.reserve(theta_dim());
    for (std::size_t i = 0; i < theta_dim(); ++i) theta.push_back(tape.constant(q[i]));
    Jet3 xj = ad::jet_lift_input(tape, x);
    Residuals r = poisson_terms(net, theta, xj, kappa, tape.constant(lambda_of(q)), bc_left, bc_right);
    return r.f.val();
}

}  // namespace niuq::bayes

namespace niuq::bayes {

std::vector<double> PoissonBpinnPosterior::mass_diagonal() const {
    std::vector<double> m(dim(), 1.0);
    std::size_t off = theta_dim();
    if (latent_u() > 0) {
        const double s = *u_data.noise.sigma_in;
        for (std::size_t i = 0; i < latent_u(); ++i) m[off + i] = 1.0 / (s * s);
    }
    off += latent_u();
    if (latent_f() > 0) {
        const double s = *f_data.noise.sigma_in;
        for (std::size_t i = 0; i < latent_f(); ++i) m[off + i] = 1.0 / (s * s);
    }
    return m;
}

}  // namespace niuq::bayes
