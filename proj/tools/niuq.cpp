// Command-line driver: operator training, experiment runs, report
// aggregation, and a quick self-test of the numerical kernels.
#include <cmath>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "niuq/ad/jet.hpp"
#include "niuq/cli/metrics.hpp"
#include "niuq/cli/runner.hpp"
#include "niuq/mcmc/hmc.hpp"
#include "niuq/pde/physics.hpp"

namespace {

using namespace niuq;

cli::ExperimentConfig load_with_flags(const std::string& config_path, const std::string& seed,
                                      const std::string& out, const std::string& mode,
                                      const std::string& baselines) {
    cli::ExperimentConfig cfg = cli::load_experiment_config(config_path);
    cli::ConfigMap overrides;
    if (!seed.empty()) overrides["run"]["seed"] = seed;
    if (!out.empty()) overrides["run"]["out"] = out;
    if (!mode.empty()) overrides["run"]["modes"] = mode;
    if (!baselines.empty()) overrides["run"]["baselines"] = baselines;
    cli::apply_overrides(cfg, overrides);
    return cfg;
}

int selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%-40s %s\n", name, ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    {  // third-order jet of tanh against the closed form at 0: tanh'''(0) = -2
        ad::Tape tape;
        ad::Jet3 x = ad::jet_lift_input(tape, 0.0);
        ad::Jet3 y = ad::jet_tanh(x);
        check("jet: tanh derivatives at 0",
              std::abs(y.d1.val() - 1.0) < 1e-12 && std::abs(y.d2.val()) < 1e-12 &&
                  std::abs(y.d3.val() + 2.0) < 1e-12);
    }
    {  // leapfrog reversibility on a Gaussian
        mcmc::LogDensity g = [](const std::vector<double>& q, std::vector<double>& grad) {
            grad = {-q[0]};
            return -0.5 * q[0] * q[0];
        };
        std::vector<double> q{0.7}, p{-0.3}, grad{-0.7};
        double logp = -0.5 * 0.49;
        mcmc::leapfrog(g, q, p, grad, logp, 0.1, 20, {1.0});
        p[0] = -p[0];
        mcmc::leapfrog(g, q, p, grad, logp, 0.1, 20, {1.0});
        check("hmc: leapfrog reversibility", std::abs(q[0] - 0.7) < 1e-10);
    }
    {  // GRF kernel diagonal
        pde::GrfSpec s;
        s.grid = pde::uniform_grid(16);
        auto k = pde::grf_kernel(s);
        bool ok = true;
        for (int i = 0; i < 16; ++i) ok = ok && std::abs(k(i, i) - 1.0) < 1e-14;
        check("grf: unit kernel diagonal", ok);
    }
    {  // relative L2 basics
        std::vector<double> r{1.0, 2.0, 2.0};
        check("metrics: relative L2",
              cli::relative_l2(r, r) == 0.0 &&
                  std::abs(cli::relative_l2({2.0, 4.0, 4.0}, r) - 1.0) < 1e-15);
    }
    {  // manufactured Poisson source at x = 0
        pde::PoissonTruth t;
        const double expect = t.kappa * (-3.0 * 4.0 * M_PI * M_PI) - t.lambda;
        check("physics: Poisson source at 0", std::abs(t.f(0.0) - expect) < 1e-12);
    }
    std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian uncertainty quantification with noisy inputs and outputs"};
    app.require_subcommand(1);

    std::string config_path, seed, out, mode, baselines;
    std::vector<std::string> report_dirs;

    CLI::App* train = app.add_subcommand("train-operator", "train an operator surrogate checkpoint");
    train->add_option("config", config_path, "experiment config file")->required();
    train->add_option("--seed", seed, "override run seed");
    train->add_option("--out", out, "override output directory");

    CLI::App* run = app.add_subcommand("run", "run an experiment end to end");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--seed", seed, "override run seed");
    run->add_option("--out", out, "override output directory");
    run->add_option("--mode", mode, "override inference modes (comma list)");
    run->add_option("--baselines", baselines, "override baselines (comma list)");

    CLI::App* rep = app.add_subcommand("report", "aggregate reports from run directories");
    rep->add_option("dirs", report_dirs, "run directories")->required();

    app.add_subcommand("selftest", "run quick oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("train-operator")) {
            auto cfg = load_with_flags(config_path, seed, out, mode, baselines);
            const double err = niuq::cli::train_operator_checkpoint(cfg);
            std::printf("checkpoint written: %s (test relative L2 error %.4g)\n",
                        cfg.checkpoint_path.c_str(), err);
        } else if (app.got_subcommand("run")) {
            auto cfg = load_with_flags(config_path, seed, out, mode, baselines);
            auto report = niuq::cli::run_experiment(cfg);
            std::cout << niuq::cli::render_report_table(report);
            std::printf("artifacts in %s (wall time %.2f s)\n", cfg.out_dir.c_str(),
                        report.wall_time_seconds);
        } else if (app.got_subcommand("report")) {
            for (const auto& dir : report_dirs) {
                auto report = niuq::cli::load_report(dir + "/report.json");
                std::printf("== %s (%s, seed %llu)\n", dir.c_str(), report.experiment.c_str(),
                            static_cast<unsigned long long>(report.seed));
                std::cout << niuq::cli::render_report_table(report) << "\n";
            }
        } else {
            return selftest();
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
