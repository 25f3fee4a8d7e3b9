#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "niuq/bayes/bpinn.hpp"
#include "niuq/bayes/mvn.hpp"
#include "niuq/bayes/operator.hpp"
#include "niuq/bayes/regression.hpp"
#include "niuq/bayes/summary.hpp"
#include "niuq/mcmc/map.hpp"
#include "niuq/pde/physics.hpp"
#include "niuq/rng.hpp"

using namespace niuq;
using namespace niuq::bayes;

namespace {

// Linear surrogate: no hidden layers, so H(x) = a x + b exactly.
RegressionPosterior linear_posterior(InferenceMode mode) {
    RegressionPosterior p;
    p.net.hidden = {};
    p.mode = mode;
    p.noise.sigma_in = 0.07;
    p.noise.sigma_out = 0.12;
    Rng rng(4);
    for (int i = 0; i < 12; ++i) {
        const double x = -1.0 + 2.0 * i / 11.0;
        p.x_obs.push_back(x + 0.07 * rng.normal());
        p.y_obs.push_back(1.8 * x - 0.4 + 0.12 * rng.normal());
    }
    return p;
}

double fd_check_worst(const mcmc::LogDensity& f, const std::vector<double>& q, std::size_t stride) {
    std::vector<double> g(q.size());
    f(q, g);
    double worst = 0.0;
    for (std::size_t k = 0; k < q.size(); k += stride) {
        const double h = 1e-6;
        std::vector<double> qp = q, qm = q, tmp(q.size());
        qp[k] += h;
        qm[k] -= h;
        const double fd = (f(qp, tmp) - f(qm, tmp)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[k]) / (std::abs(fd) + 1e-7));
    }
    return worst;
}

}  // namespace

TEST_CASE("recast equals the exact marginal likelihood for a linear map") {
    // With H(x) = a x + b, marginalizing the input noise gives exactly
    // y | x_obs ~ N(a x_obs + b, a^2 s_in^2 + s_out^2); compare log-posterior
    // differences so additive constants cancel.
    auto p = linear_posterior(InferenceMode::RecastTaylor);
    const double s_in = *p.noise.sigma_in, s_out = p.noise.sigma_out;
    auto manual = [&](const std::vector<double>& q) {
        const double a = q[0], b = q[1];
        double lp = normal_logpdf(a, 0.0, p.theta_prior_std) +
                    normal_logpdf(b, 0.0, p.theta_prior_std);
        const double var = a * a * s_in * s_in + s_out * s_out;
        for (std::size_t i = 0; i < p.x_obs.size(); ++i)
            lp += normal_logpdf(p.y_obs[i], a * p.x_obs[i] + b, std::sqrt(var));
        return lp;
    };
    const std::vector<double> q1{1.8, -0.4}, q2{0.3, 1.1}, q3{-2.2, 0.05};
    std::vector<double> g;
    const double l1 = p.logpost(q1, nullptr), l2 = p.logpost(q2, nullptr),
                 l3 = p.logpost(q3, nullptr);
    CHECK(l1 - l2 == doctest::Approx(manual(q1) - manual(q2)).epsilon(1e-12));
    CHECK(l1 - l3 == doctest::Approx(manual(q1) - manual(q3)).epsilon(1e-12));
}

TEST_CASE("all modes coincide when inputs are clean") {
    auto base = linear_posterior(InferenceMode::IgnoreInputNoise);
    base.noise.sigma_in.reset();
    auto model = base, recast = base;
    model.mode = InferenceMode::ModelInputNoise;
    recast.mode = InferenceMode::RecastTaylor;
    CHECK(base.dim() == model.dim());  // no latents without input noise
    const std::vector<double> q{0.9, 0.2};
    const double l0 = base.logpost(q, nullptr);
    CHECK(model.logpost(q, nullptr) == doctest::Approx(l0).epsilon(1e-14));
    CHECK(recast.logpost(q, nullptr) == doctest::Approx(l0).epsilon(1e-14));
}

TEST_CASE("regression gradients match finite differences in every mode") {
    for (auto mode : {InferenceMode::IgnoreInputNoise, InferenceMode::ModelInputNoise,
                      InferenceMode::RecastTaylor}) {
        RegressionPosterior p;
        p.net.hidden = {6};
        p.mode = mode;
        p.noise.sigma_in = 0.05;
        p.noise.sigma_out = 0.1;
        Rng rng(8);
        for (int i = 0; i < 9; ++i) {
            p.x_obs.push_back(-1.0 + 0.25 * i);
            p.y_obs.push_back(std::sin(2 * p.x_obs.back()) + 0.05 * rng.normal());
        }
        auto q = p.initial_point(3);
        REQUIRE(q.size() == p.dim());
        CHECK(fd_check_worst(p.density(), q, 3) < 1e-5);
    }
}

TEST_CASE("latent coordinates appear only in the modeled mode") {
    auto p = linear_posterior(InferenceMode::ModelInputNoise);
    CHECK(p.dim() == 2 + p.x_obs.size());
    CHECK(p.param_names().back().find("chi") != std::string::npos);
    auto mass = p.mass_diagonal();
    REQUIRE(mass.size() == p.dim());
    CHECK(mass[0] == 1.0);
    const double s = *p.noise.sigma_in;
    CHECK(mass.back() == doctest::Approx(1.0 / (s * s)));
    p.mode = InferenceMode::IgnoreInputNoise;
    CHECK(p.dim() == 2);
}

TEST_CASE("conjugate linear-gaussian posterior is recovered") {
    // Ignore-mode linear model: closed-form Gaussian posterior over (a, b).
    auto p = linear_posterior(InferenceMode::IgnoreInputNoise);
    const double s = p.noise.sigma_out;
    Eigen::Matrix2d prec = Eigen::Matrix2d::Identity();  // unit prior
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < p.x_obs.size(); ++i) {
        Eigen::Vector2d phi(p.x_obs[i], 1.0);
        prec += phi * phi.transpose() / (s * s);
        rhs += phi * p.y_obs[i] / (s * s);
    }
    const Eigen::Vector2d mu = prec.ldlt().solve(rhs);
    const Eigen::Matrix2d cov = prec.inverse();
    // exactness: log-posterior differences equal the Gaussian quadratic form
    auto quad = [&](const std::vector<double>& q) {
        Eigen::Vector2d d(q[0] - mu(0), q[1] - mu(1));
        return -0.5 * d.dot(prec * d);
    };
    const std::vector<double> q1{mu(0), mu(1)}, q2{mu(0) + 0.7, mu(1) - 1.3};
    CHECK(p.logpost(q1, nullptr) - p.logpost(q2, nullptr) ==
          doctest::Approx(quad(q1) - quad(q2)).epsilon(1e-10));
    // and sampling finds the closed-form mean
    mcmc::HmcConfig cfg;
    cfg.step_size = 0.05;
    cfg.leapfrog_steps = 30;
    cfg.num_samples = 3000;
    cfg.burn_in = 1000;
    cfg.seed = 2;
    auto samples = mcmc::hmc_sample(p.density(), p.initial_point(1), cfg);
    auto m = samples.mean();
    CHECK(std::abs(m[0] - mu(0)) < 4 * std::sqrt(cov(0, 0)) / 10);
    CHECK(std::abs(m[1] - mu(1)) < 4 * std::sqrt(cov(1, 1)) / 10);
}

TEST_CASE("map estimate agrees with the conjugate posterior mode") {
    auto p = linear_posterior(InferenceMode::IgnoreInputNoise);
    const double s = p.noise.sigma_out;
    Eigen::Matrix2d prec = Eigen::Matrix2d::Identity();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < p.x_obs.size(); ++i) {
        Eigen::Vector2d phi(p.x_obs[i], 1.0);
        prec += phi * phi.transpose() / (s * s);
        rhs += phi * p.y_obs[i] / (s * s);
    }
    const Eigen::Vector2d mu = prec.ldlt().solve(rhs);
    nn::AdamConfig adam;
    adam.lr = 0.05;
    auto res = mcmc::map_estimate(p.density(), {0.0, 0.0}, adam, 3000);
    CHECK(res.params[0] == doctest::Approx(mu(0)).epsilon(1e-3));
    CHECK(res.params[1] == doctest::Approx(mu(1)).epsilon(1e-3));
    CHECK(res.objective_trace.front() > res.objective_trace.back());
}

TEST_CASE("mvn log density matches the scalar product form") {
    // diagonal covariance: mvn must equal the sum of 1d densities
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(3, 3);
    chol.diagonal() << 0.5, 2.0, 1.25;
    const std::vector<double> x{0.3, -1.0, 0.7}, mean{0.1, 0.2, -0.3};
    double ref = 0.0;
    for (int i = 0; i < 3; ++i) ref += normal_logpdf(x[i], mean[i], chol(i, i));
    CHECK(mvn_logpdf(x, mean, chol) == doctest::Approx(ref).epsilon(1e-13));
    // dense factor: compare against the explicit formula
    Eigen::MatrixXd A(2, 2);
    A << 1.2, 0.0, -0.7, 0.9;
    const std::vector<double> x2{0.4, -0.6}, m2{0.0, 0.1};
    Eigen::Vector2d d(x2[0] - m2[0], x2[1] - m2[1]);
    Eigen::Matrix2d cov = A * A.transpose();
    const double ref2 = -0.5 * d.dot(cov.inverse() * d) - 0.5 * std::log(cov.determinant()) -
                        std::log(2 * M_PI);
    CHECK(mvn_logpdf(x2, m2, A) == doctest::Approx(ref2).epsilon(1e-12));
    // tape version agrees and differentiates correctly
    ad::Tape t;
    std::vector<ad::Var> xv{t.leaf(x2[0]), t.leaf(x2[1])};
    ad::Var lp = mvn_logpdf_var(xv, m2, A);
    CHECK(lp.val() == doctest::Approx(ref2).epsilon(1e-12));
    t.reverse(lp);
    Eigen::Vector2d grad_ref = -cov.inverse() * d;
    CHECK(t.adjoint(xv[0]) == doctest::Approx(grad_ref(0)).epsilon(1e-10));
    CHECK(t.adjoint(xv[1]) == doctest::Approx(grad_ref(1)).epsilon(1e-10));
    // invalid factor
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(check_cholesky(bad), Error);
}

TEST_CASE("pinn posterior respects the hard boundary values") {
    PoissonBpinnPosterior p;
    p.net.hidden = {8};
    p.bc_left = 1.0;
    p.bc_right = 1.0;
    auto q = p.initial_point(6);
    CHECK(p.predict_u(q, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.predict_u(q, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.predict_u(q, 0.5) != doctest::Approx(1.0));
}

TEST_CASE("pinn gradients match finite differences with latents and lambda") {
    PoissonBpinnPosterior p;
    p.net.hidden = {5};
    p.infer_lambda = true;
    p.mode = InferenceMode::ModelInputNoise;
    pde::PoissonTruth truth;
    truth.lambda = 0.15;
    Rng rng(12);
    for (int i = 0; i < 8; ++i) {
        const double x = (i + 0.5) / 8.0;
        p.f_data.x.push_back(x + 0.01 * rng.normal());
        p.f_data.y.push_back(truth.f(x) + 0.05 * rng.normal());
    }
    p.f_data.noise.sigma_in = 0.01;
    p.f_data.noise.sigma_out = 0.05;
    for (int i = 0; i < 3; ++i) {
        const double x = (i + 0.5) / 3.0;
        p.u_data.x.push_back(x);
        p.u_data.y.push_back(truth.u(x));
    }
    p.u_data.noise.sigma_out = 0.02;
    auto q = p.initial_point(9);
    REQUIRE(q.size() == p.theta_dim() + 8 + 1);
    CHECK(p.lambda_of(q) == doctest::Approx(std::exp(q.back())));
    CHECK(fd_check_worst(p.density(), q, 4) < 1e-5);
    CHECK(p.param_names().back() == "log_lambda");
}

TEST_CASE("pinn residual prediction uses the surrogate derivatives") {
    // f = kappa u'' - lambda u^3 evaluated from the same draw must satisfy the
    // identity against finite differences of predict_u.
    PoissonBpinnPosterior p;
    p.net.hidden = {6};
    p.lambda = 0.2;
    auto q = p.initial_point(2);
    const double x = 0.37, h = 1e-5;
    const double u = p.predict_u(q, x);
    const double uxx =
        (p.predict_u(q, x + h) - 2 * u + p.predict_u(q, x - h)) / (h * h);
    CHECK(p.predict_f(q, x) ==
          doctest::Approx(p.kappa * uxx - p.lambda * u * u * u).epsilon(1e-4));
}

TEST_CASE("operator posterior in whitened coordinates") {
    // affine deeponet (p = 1) over a 3-point grid with an identity prior factor
    nn::NetworkSpec spec;
    spec.kind = nn::NetworkKind::DeepONet;
    spec.branch.in = 3;
    spec.branch.out = 1;
    spec.trunk.in = 1;
    spec.trunk.out = 1;
    spec.latent_p = 1;
    nn::OperatorModel model;
    model.spec = spec;
    Rng rng(1);
    model.params = nn::init_params(spec, rng);
    model.sensor_grid = {0.0, 0.5, 1.0};

    OperatorPosterior post;
    post.model = &model;
    post.v_prior.mean = {0.2, -0.1, 0.4};
    post.v_prior.chol = Eigen::MatrixXd::Identity(3, 3);
    post.v_data.indices = {0, 2};
    post.v_data.values = {0.25, 0.35};
    post.v_data.sigma = 0.1;
    post.u_data.coords = {{0.5}};
    post.u_data.values = {0.8};
    post.u_data.sigma = 0.2;
    post.validate();

    auto q0 = post.initial_point();
    CHECK(q0 == std::vector<double>(3, 0.0));
    CHECK(post.fields_of(q0) == post.v_prior.mean);  // z = 0 maps to the prior mean
    const std::vector<double> q{0.3, -0.8, 1.1};
    auto v = post.fields_of(q);
    for (int i = 0; i < 3; ++i) CHECK(v[i] == doctest::Approx(post.v_prior.mean[i] + q[i]));
    CHECK(fd_check_worst(post.density(), q, 1) < 1e-6);
    // predict_u evaluates the surrogate on the unwhitened field
    CHECK(post.predict_u(q, {0.5}) ==
          doctest::Approx(nn::deeponet_forward(model, v, std::vector<double>{0.5})).epsilon(1e-12));
    // dropping the u-likelihood changes the density
    auto no_u = post;
    no_u.include_u_likelihood = false;
    CHECK(no_u.logpost(q, nullptr) != doctest::Approx(post.logpost(q, nullptr)));
}

TEST_CASE("field summary reduces draws pointwise") {
    mcmc::PosteriorSamples s;
    s.draws = {{1.0}, {3.0}, {5.0}};
    auto summary = predict_summary(s, [](const std::vector<double>& q) {
        return std::vector<double>{q[0], 2 * q[0]};
    });
    REQUIRE(summary.mean.size() == 2);
    CHECK(summary.mean[0] == doctest::Approx(3.0));
    CHECK(summary.mean[1] == doctest::Approx(6.0));
    CHECK(summary.std[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
    CHECK(summary.std[1] == doctest::Approx(2 * std::sqrt(8.0 / 3.0)));
}
