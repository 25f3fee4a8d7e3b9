#include "niuq/cli/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>

#include "niuq/bayes/bpinn.hpp"
#include "niuq/bayes/operator.hpp"
#include "niuq/bayes/regression.hpp"
#include "niuq/bayes/summary.hpp"
#include "niuq/cli/metrics.hpp"
#include "niuq/cli/plot.hpp"
#include "niuq/mcmc/map.hpp"
#include "niuq/nn/checkpoint.hpp"
#include "niuq/nn/train.hpp"
#include "niuq/pde/physics.hpp"

namespace niuq::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.1415926535897932384626433833;

// ------------------------------------------------------------- artifacts

struct ArtifactTracker {
    std::string dir;
    std::vector<std::string> names;

    std::string path(const std::string& name) {
        names.push_back(name);
        return dir + "/" + name;
    }
    void discard_all() {
        for (const auto& n : names) {
            std::error_code ec;
            fs::remove(fs::path(dir) / n, ec);
        }
    }
};

void write_summary_csv(const std::string& path, const std::vector<double>& coords,
                       const bayes::FieldSummary& s, const std::vector<double>& ref) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "coordinate,mean,std,reference\n";
    char buf[160];
    for (std::size_t i = 0; i < coords.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", coords[i], s.mean[i], s.std[i],
                      ref[i]);
        out << buf;
    }
}

// Field target: summary CSV + figure, returning (error, coverage).
struct TargetMetrics {
    double err, cov, std_avg;
};

TargetMetrics emit_target(ArtifactTracker& art, const std::string& target,
                          const std::vector<double>& coords, const bayes::FieldSummary& s,
                          const std::vector<double>& ref, const std::vector<double>& scatter_x = {},
                          const std::vector<double>& scatter_y = {}, bool figure = true) {
    write_summary_csv(art.path("summary_" + target + ".csv"), coords, s, ref);
    if (figure) {
        PlotData p;
        p.x = coords;
        p.mean = s.mean;
        p.std = s.std;
        p.reference = ref;
        p.scatter_x = scatter_x;
        p.scatter_y = scatter_y;
        p.title = target;
        emit_plot(p, art.path("fig_" + target + ".svg"));
    }
    double std_avg = 0.0;
    for (double v : s.std) std_avg += v;
    std_avg /= static_cast<double>(s.std.size());
    return {relative_l2(s.mean, ref), coverage(s.mean, s.std, ref), std_avg};
}

mcmc::HmcConfig hmc_for_row(const ExperimentConfig& cfg, std::size_t row) {
    mcmc::HmcConfig h = cfg.hmc;
    h.seed = cfg.seed * 7919 + 31 * row + 1;
    return h;
}

// --------------------------------------------------------- E1: regression

double regression_truth(double x) { return 0.1 * std::cos(2.0 * kPi * x) + std::tanh(3.0 * kPi * x); }

std::vector<double> train_dropout_mlp(const nn::MlpSpec& spec, const std::vector<double>& xs,
                                      const std::vector<double>& ys, double rate,
                                      std::size_t iterations, double lr, std::uint64_t seed) {
    nn::NetworkSpec net;
    net.kind = nn::NetworkKind::Mlp;
    net.mlp = spec;
    Rng init_rng(seed);
    nn::ParamVector pv = nn::init_params(net, init_rng);
    std::vector<double>& params = pv.data;
    nn::AdamState adam;
    nn::AdamConfig acfg;
    acfg.lr = lr;
    Rng rng = Rng::stream(seed, 1);
    std::vector<double> grad(params.size());
    nn::MlpCache cache;
    std::vector<std::vector<double>> masks;
    const double n = static_cast<double>(xs.size());
    for (std::size_t it = 0; it < iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            auto out = nn::mlp_forward_dropout_cached(spec, params, std::span(&x, 1), rate, rng,
                                                      cache, masks);
            const double dout = 2.0 * (out[0] - ys[i]) / n;
            nn::mlp_backward_dropout(spec, params, cache, masks, std::span(&dout, 1), grad);
        }
        nn::adam_step(params, grad, adam, acfg);
    }
    return params;
}

void run_e1(const ExperimentConfig& cfg, ArtifactTracker& art, RunReport& report) {
    const std::vector<double> x_obs = linspace(-1.0, 1.0, cfg.n_u);
    std::vector<double> y_clean(cfg.n_u);
    for (std::size_t i = 0; i < cfg.n_u; ++i) y_clean[i] = regression_truth(x_obs[i]);
    pde::NoisyDataset data = pde::make_noisy(x_obs, y_clean, cfg.sigma_in_u, cfg.sigma_out_u,
                                             cfg.data_seed);

    const std::vector<double> grid = linspace(-1.0, 1.0, 256);
    std::vector<double> ref(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) ref[i] = regression_truth(grid[i]);

    nn::MlpSpec spec{1, 1, std::vector<int>(cfg.hidden_layers, static_cast<int>(cfg.hidden_width)),
                     nn::Activation::Tanh};

    bayes::RegressionPosterior base;
    base.net = spec;
    base.x_obs = data.inputs.noisy;
    base.y_obs = data.outputs.noisy;
    base.noise.sigma_in = cfg.sigma_in_u > 0.0 ? std::optional<double>(cfg.sigma_in_u) : std::nullopt;
    base.noise.sigma_out = cfg.sigma_out_u;
    base.theta_prior_std = cfg.theta_prior_std;
    base.chi_prior_std = cfg.chi_prior_std;

    std::size_t row_idx = 0;
    bool first_samples = true;
    for (bayes::InferenceMode mode : cfg.modes) {
        bayes::RegressionPosterior post = base;
        post.mode = mode;
        const std::string label = bayes::to_string(mode);
        mcmc::HmcConfig h = hmc_for_row(cfg, row_idx++);
        if (h.mass.empty()) h.mass = post.mass_diagonal();
        auto samples = mcmc::hmc_sample(post.density(), post.initial_point(cfg.seed), h);
        mcmc::export_samples(samples, post.param_names(), art.path("samples_" + label + ".csv"),
                             art.path("samples_" + label + ".json"));
        if (first_samples) {
            fs::copy_file(art.dir + "/samples_" + label + ".csv", art.path("samples.csv"),
                          fs::copy_options::overwrite_existing);
            first_samples = false;
        }
        auto summary = bayes::predict_summary(samples, [&](const std::vector<double>& q) {
            std::vector<double> out(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) out[i] = post.predict(q, grid[i]);
            return out;
        });
        auto m = emit_target(art, "fit_" + label, grid, summary, ref, data.inputs.noisy,
                             data.outputs.noisy);
        report.rows.push_back({label,
                               {{"err", m.err},
                                {"cov", m.cov},
                                {"acceptance", samples.acceptance_rate},
                                {"step", samples.adapted_step_size}}});
    }

    for (const auto& b : cfg.baselines) {
        if (b == "map") {
            bayes::RegressionPosterior post = base;
            post.mode = bayes::InferenceMode::IgnoreInputNoise;
            nn::AdamConfig acfg;
            acfg.lr = cfg.map_lr;
            auto res = mcmc::map_estimate(post.density(), post.initial_point(cfg.seed), acfg,
                                          cfg.map_iterations);
            std::vector<double> mean(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) mean[i] = post.predict(res.params, grid[i]);
            bayes::FieldSummary s{mean, std::vector<double>(grid.size(), 0.0)};
            auto m = emit_target(art, "fit_map", grid, s, ref, data.inputs.noisy, data.outputs.noisy);
            report.rows.push_back({"map", {{"err", m.err}, {"objective", res.final_objective}}});
        } else if (b == "dropout") {
            auto params = train_dropout_mlp(spec, data.inputs.noisy, data.outputs.noisy,
                                            cfg.dropout_rate, cfg.dropout_train_iterations,
                                            cfg.dropout_lr, cfg.seed + 17);
            bayes::FieldSummary s;
            s.mean.resize(grid.size());
            s.std.resize(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                auto passes = nn::dropout_predict(spec, params, std::span(&grid[i], 1),
                                                  cfg.dropout_rate, cfg.dropout_passes,
                                                  cfg.seed + 29 + i);
                double mean = 0.0, sq = 0.0;
                for (const auto& p : passes) mean += p[0];
                mean /= static_cast<double>(passes.size());
                for (const auto& p : passes) sq += (p[0] - mean) * (p[0] - mean);
                s.mean[i] = mean;
                s.std[i] = std::sqrt(sq / static_cast<double>(passes.size()));
            }
            auto m = emit_target(art, "fit_dropout", grid, s, ref, data.inputs.noisy,
                                 data.outputs.noisy);
            report.rows.push_back(
                {"dropout", {{"err", m.err}, {"cov", m.cov}, {"rate", cfg.dropout_rate}}});
        } else {
            throw InvalidInput("E1: unknown baseline " + b);
        }
    }
}

// ------------------------------------------------- E2/E3: Poisson B-PINN

struct PoissonSetup {
    bayes::PoissonBpinnPosterior base;  // mode filled per row
    pde::PoissonTruth truth;
    std::vector<double> grid, ref_u, ref_f;
};

PoissonSetup poisson_setup(const ExperimentConfig& cfg, bool inverse) {
    PoissonSetup s;
    s.truth.kappa = cfg.kappa;
    s.truth.lambda = inverse ? cfg.lambda_true : cfg.lambda;

    s.grid = linspace(0.0, 1.0, 256);
    s.ref_u.resize(s.grid.size());
    s.ref_f.resize(s.grid.size());
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        s.ref_u[i] = s.truth.u(s.grid[i]);
        s.ref_f[i] = s.truth.f(s.grid[i]);
    }

    auto& post = s.base;
    post.net = nn::MlpSpec{1, 1, std::vector<int>(cfg.hidden_layers, static_cast<int>(cfg.hidden_width)),
                           nn::Activation::Tanh};
    post.kappa = cfg.kappa;
    post.lambda = cfg.lambda;
    post.infer_lambda = inverse;
    post.theta_prior_std = cfg.theta_prior_std;
    post.chi_prior_std = cfg.chi_prior_std;
    post.bc_left = s.truth.u(0.0);
    post.bc_right = s.truth.u(1.0);

    if (cfg.n_f > 0) {
        auto xf = linspace(0.0, 1.0, cfg.n_f);
        std::vector<double> fy(cfg.n_f);
        for (std::size_t i = 0; i < cfg.n_f; ++i) fy[i] = s.truth.f(xf[i]);
        auto noisy = pde::make_noisy(xf, fy, cfg.sigma_in_f, cfg.sigma_out_f,
                                     cfg.data_seed * 2 + 1);
        post.f_data.x = noisy.inputs.noisy;
        post.f_data.y = noisy.outputs.noisy;
        post.f_data.noise.sigma_in =
            cfg.sigma_in_f > 0.0 ? std::optional<double>(cfg.sigma_in_f) : std::nullopt;
        post.f_data.noise.sigma_out = cfg.sigma_out_f;
    }
    if (cfg.n_u > 0) {
        auto xu = linspace(0.0, 1.0, cfg.n_u);
        std::vector<double> uy(cfg.n_u);
        for (std::size_t i = 0; i < cfg.n_u; ++i) uy[i] = s.truth.u(xu[i]);
        auto noisy = pde::make_noisy(xu, uy, cfg.sigma_in_u, cfg.sigma_out_u,
                                     cfg.data_seed * 2 + 2);
        post.u_data.x = noisy.inputs.noisy;
        post.u_data.y = noisy.outputs.noisy;
        post.u_data.noise.sigma_in =
            cfg.sigma_in_u > 0.0 ? std::optional<double>(cfg.sigma_in_u) : std::nullopt;
        post.u_data.noise.sigma_out = cfg.sigma_out_u;
    }
    return s;
}

void run_poisson(const ExperimentConfig& cfg, ArtifactTracker& art, RunReport& report,
                 bool inverse) {
    PoissonSetup s = poisson_setup(cfg, inverse);
    if (inverse)
        report.notes.push_back(
            "inverse problem: data generated with lambda = 0.15; posterior lambda reported as "
            "mean +/- std");

    std::size_t row_idx = 0;
    bool first_samples = true;
    for (bayes::InferenceMode mode : cfg.modes) {
        bayes::PoissonBpinnPosterior post = s.base;
        post.mode = mode;
        const std::string label = bayes::to_string(mode);
        mcmc::HmcConfig h = hmc_for_row(cfg, row_idx++);
        if (h.mass.empty()) h.mass = post.mass_diagonal();
        auto samples = mcmc::hmc_sample(post.density(), post.initial_point(cfg.seed), h);
        mcmc::export_samples(samples, post.param_names(), art.path("samples_" + label + ".csv"),
                             art.path("samples_" + label + ".json"));
        if (first_samples) {
            fs::copy_file(art.dir + "/samples_" + label + ".csv", art.path("samples.csv"),
                          fs::copy_options::overwrite_existing);
            first_samples = false;
        }
        auto sum_u = bayes::predict_summary(samples, [&](const std::vector<double>& q) {
            std::vector<double> out(s.grid.size());
            for (std::size_t i = 0; i < s.grid.size(); ++i) out[i] = post.predict_u(q, s.grid[i]);
            return out;
        });
        auto sum_f = bayes::predict_summary(samples, [&](const std::vector<double>& q) {
            std::vector<double> out(s.grid.size());
            for (std::size_t i = 0; i < s.grid.size(); ++i) out[i] = post.predict_f(q, s.grid[i]);
            return out;
        });
        auto mu = emit_target(art, "u_" + label, s.grid, sum_u, s.ref_u, post.u_data.x,
                              post.u_data.y);
        auto mf = emit_target(art, "f_" + label, s.grid, sum_f, s.ref_f, post.f_data.x,
                              post.f_data.y);
        ReportRow row;
        row.label = label;
        row.metrics = {{"err_u", mu.err},
                       {"err_f", mf.err},
                       {"cov_u", mu.cov},
                       {"cov_f", mf.cov},
                       {"acceptance", samples.acceptance_rate},
                       {"step", samples.adapted_step_size}};
        if (inverse) {
            double lm = 0.0, lsq = 0.0;
            for (const auto& q : samples.draws) lm += post.lambda_of(q);
            lm /= static_cast<double>(samples.draws.size());
            for (const auto& q : samples.draws) {
                const double l = post.lambda_of(q);
                lsq += (l - lm) * (l - lm);
            }
            row.metrics.emplace_back("lambda_mean", lm);
            row.metrics.emplace_back("lambda_std",
                                     std::sqrt(lsq / static_cast<double>(samples.draws.size())));
        }
        report.rows.push_back(std::move(row));
    }

    for (const auto& b : cfg.baselines) {
        if (b != "map") throw InvalidInput("Poisson experiments: unknown baseline " + b);
        bayes::PoissonBpinnPosterior post = s.base;
        post.mode = bayes::InferenceMode::IgnoreInputNoise;
        nn::AdamConfig acfg;
        acfg.lr = cfg.map_lr;
        auto res = mcmc::map_estimate(post.density(), post.initial_point(cfg.seed), acfg,
                                      cfg.map_iterations);
        std::vector<double> mu(s.grid.size()), mf(s.grid.size());
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
            mu[i] = post.predict_u(res.params, s.grid[i]);
            mf[i] = post.predict_f(res.params, s.grid[i]);
        }
        bayes::FieldSummary su{mu, std::vector<double>(s.grid.size(), 0.0)};
        bayes::FieldSummary sf{mf, std::vector<double>(s.grid.size(), 0.0)};
        auto emu = emit_target(art, "u_map", s.grid, su, s.ref_u);
        auto emf = emit_target(art, "f_map", s.grid, sf, s.ref_f);
        report.rows.push_back(
            {"map", {{"err_u", emu.err}, {"err_f", emf.err}, {"objective", res.final_objective}}});
    }
}

// ----------------------------------------------------- E4/E5: operators

std::span<const double> subnet_params(const nn::OperatorModel& m, const std::string& prefix,
                                      const nn::MlpSpec& spec) {
    const nn::Slice& s = m.params.layout.find(prefix + ".w0");
    return std::span<const double>(m.params.data.data() + s.offset, spec.param_count());
}

double output_bias(const nn::OperatorModel& m) {
    if (!m.params.layout.has("output_bias")) return 0.0;
    return m.params.data[m.params.layout.find("output_bias").offset];
}

// Predictive summary of the output field from draws of the input function(s),
// reusing trunk features across draws.
bayes::FieldSummary operator_u_summary(const nn::OperatorModel& m,
                                       const std::vector<std::vector<double>>& draws,
                                       const std::vector<std::vector<double>>& coords) {
    const bool mio = m.spec.kind == nn::NetworkKind::MioDeepONet;
    const std::size_t n = m.sensor_grid.size();
    const std::size_t p = m.spec.latent_p;
    std::vector<std::vector<double>> tf(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) tf[j] = nn::trunk_features(m, coords[j]);
    const double bias = output_bias(m);

    std::vector<double> sq(coords.size(), 0.0);
    std::vector<double> pred(coords.size());
    const double M = static_cast<double>(draws.size());
    std::vector<double> welford_mean(coords.size(), 0.0);
    std::size_t count = 0;
    for (const auto& q : draws) {
        std::vector<double> b1, b2;
        if (mio) {
            b1 = nn::mlp_forward(m.spec.branch, subnet_params(m, "branch1", m.spec.branch),
                                 std::span(q.data(), n));
            b2 = nn::mlp_forward(m.spec.branch2, subnet_params(m, "branch2", m.spec.branch2),
                                 std::span(q.data() + n, n));
        } else {
            b1 = nn::mlp_forward(m.spec.branch, subnet_params(m, "branch", m.spec.branch),
                                 std::span(q.data(), n));
        }
        for (std::size_t j = 0; j < coords.size(); ++j) {
            double acc = bias;
            for (std::size_t k = 0; k < p; ++k)
                acc += (mio ? b1[k] * b2[k] : b1[k]) * tf[j][k];
            pred[j] = acc;
        }
        ++count;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            const double d = pred[j] - welford_mean[j];
            welford_mean[j] += d / static_cast<double>(count);
            sq[j] += d * (pred[j] - welford_mean[j]);
        }
    }
    bayes::FieldSummary s;
    s.mean = welford_mean;
    s.std.resize(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) s.std[j] = std::sqrt(sq[j] / M);
    return s;
}

// Mean/std of one slice of the draws (an input function on the grid).
bayes::FieldSummary slice_summary(const std::vector<std::vector<double>>& draws, std::size_t offset,
                                  std::size_t len) {
    bayes::FieldSummary s;
    s.mean.assign(len, 0.0);
    s.std.assign(len, 0.0);
    const double M = static_cast<double>(draws.size());
    for (const auto& q : draws)
        for (std::size_t i = 0; i < len; ++i) s.mean[i] += q[offset + i];
    for (auto& v : s.mean) v /= M;
    for (const auto& q : draws)
        for (std::size_t i = 0; i < len; ++i) {
            const double d = q[offset + i] - s.mean[i];
            s.std[i] += d * d;
        }
    for (auto& v : s.std) v = std::sqrt(v / M);
    return s;
}

nn::OperatorDataset corpus_to_dataset(const pde::OperatorCorpus& c) {
    nn::OperatorDataset d;
    d.sensor_grid = c.grid;
    d.inputs = c.inputs;
    d.inputs2 = c.inputs2;
    if (c.problem == pde::CorpusProblem::RdConstant) {
        for (double x : c.grid) d.eval_coords.push_back({x});
    } else {
        const std::size_t n_frames =
            c.solutions.empty() ? 0 : c.solutions[0].size() / c.grid.size();
        for (std::size_t j = 0; j < n_frames; ++j)
            for (double x : c.grid)
                d.eval_coords.push_back({x, static_cast<double>(j) / static_cast<double>(n_frames - 1)});
    }
    d.targets = c.solutions;
    return d;
}

void run_operator(const ExperimentConfig& cfg, ArtifactTracker& art, RunReport& report,
                  bool hetero) {
    if (cfg.train_first) train_operator_checkpoint(cfg);
    if (!fs::exists(cfg.checkpoint_path))
        throw InvalidInput("operator checkpoint not found (set operator.train_first or run "
                           "train-operator): " +
                           cfg.checkpoint_path);
    nn::OperatorModel model = nn::load_checkpoint(cfg.checkpoint_path);
    const std::vector<double>& grid = model.sensor_grid;
    const std::size_t n = grid.size();
    report.notes.push_back("surrogate test relative L2 error: " + std::to_string(model.test_rel_l2));

    pde::GrfSpec grf;
    grf.correlation_length = cfg.grf_length;
    grf.grid = grid;
    Eigen::MatrixXd chol = pde::grf_cholesky(grf);

    // ground truth input function(s) and output field
    std::vector<double> k_true, f_true;
    std::vector<double> u_final;                   // u(., t=1)
    std::vector<std::vector<double>> field;        // full space-time field (hetero)
    if (hetero) {
        k_true = pde::grf_sample(grf, 2 * cfg.truth_seed);
        f_true = pde::grf_sample(grf, 2 * cfg.truth_seed + 1);
        field = pde::rd_solve_hetero(k_true, f_true);
        u_final = field.back();
    } else {
        f_true = pde::grf_sample(grf, cfg.truth_seed);
        u_final = pde::rd_solve_constant(f_true);
    }

    // measurements
    Rng loc_rng = Rng::stream(cfg.data_seed, 3);
    Rng noise_rng = Rng::stream(cfg.data_seed, 4);
    auto grid_meas = [&](const std::vector<double>& truth, std::size_t count, double sigma) {
        bayes::GridMeasurements g;
        g.sigma = sigma;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t idx = loc_rng.index(n);
            g.indices.push_back(idx);
            g.values.push_back(truth[idx] + sigma * noise_rng.normal());
        }
        return g;
    };

    bayes::OperatorPosterior base;
    base.model = &model;
    base.v_prior = {std::vector<double>(n, 0.0), chol};
    if (hetero) {
        base.w_prior = base.v_prior;
        base.v_data = grid_meas(k_true, cfg.meas_k, cfg.meas_sigma_k);
        base.w_data = grid_meas(f_true, cfg.meas_f, cfg.meas_sigma_f);
    } else {
        base.v_data = grid_meas(f_true, cfg.meas_f, cfg.meas_sigma_f);
    }
    base.u_data.sigma = cfg.meas_sigma_u;
    const std::size_t n_frames = hetero ? field.size() : 0;
    for (std::size_t i = 0; i < cfg.meas_u; ++i) {
        if (hetero) {
            const std::size_t it = loc_rng.index(n_frames);
            const std::size_t ix = loc_rng.index(n);
            const double t = static_cast<double>(it) / static_cast<double>(n_frames - 1);
            base.u_data.coords.push_back({grid[ix], t});
            base.u_data.values.push_back(field[it][ix] + cfg.meas_sigma_u * noise_rng.normal());
        } else {
            const std::size_t ix = loc_rng.index(n);
            base.u_data.coords.push_back({grid[ix]});
            base.u_data.values.push_back(u_final[ix] + cfg.meas_sigma_u * noise_rng.normal());
        }
    }

    // evaluation coordinates for the output field
    std::vector<std::vector<double>> u_coords;
    std::vector<double> u_ref, u_axis;
    if (hetero) {
        for (std::size_t j = 0; j < n_frames; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                u_coords.push_back({grid[i], static_cast<double>(j) / static_cast<double>(n_frames - 1)});
                u_ref.push_back(field[j][i]);
                u_axis.push_back(static_cast<double>(j * n + i));
            }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            u_coords.push_back({grid[i]});
            u_ref.push_back(u_final[i]);
            u_axis.push_back(grid[i]);
        }
    }

    auto run_row = [&](const std::string& label, bayes::OperatorPosterior post, std::size_t row_idx) {
        post.validate();
        auto samples = mcmc::hmc_sample(post.density(), post.initial_point(),
                                        hmc_for_row(cfg, row_idx));
        mcmc::export_samples(samples, post.param_names(), art.path("samples_" + label + ".csv"),
                             art.path("samples_" + label + ".json"));
        if (row_idx == 0)
            fs::copy_file(art.dir + "/samples_" + label + ".csv", art.path("samples.csv"),
                          fs::copy_options::overwrite_existing);
        // function-space draws for field summaries
        std::vector<std::vector<double>> fdraws(samples.draws.size());
        for (std::size_t i = 0; i < samples.draws.size(); ++i)
            fdraws[i] = post.fields_of(samples.draws[i]);

        ReportRow row;
        row.label = label;
        if (hetero) {
            auto sk = slice_summary(fdraws, 0, n);
            auto sf = slice_summary(fdraws, n, n);
            std::vector<double> k_sx(base.v_data.indices.size()), k_sy = base.v_data.values;
            for (std::size_t i = 0; i < k_sx.size(); ++i) k_sx[i] = grid[base.v_data.indices[i]];
            std::vector<double> f_sx(base.w_data.indices.size()), f_sy = base.w_data.values;
            for (std::size_t i = 0; i < f_sx.size(); ++i) f_sx[i] = grid[base.w_data.indices[i]];
            auto mk = emit_target(art, "k_" + label, grid, sk, k_true, k_sx, k_sy);
            auto mf = emit_target(art, "f_" + label, grid, sf, f_true, f_sx, f_sy);
            auto su = operator_u_summary(model, fdraws, u_coords);
            auto mu = emit_target(art, "u_" + label, u_axis, su, u_ref, {}, {}, false);
            // final-time slice figure
            PlotData p;
            p.x = grid;
            p.mean.assign(su.mean.end() - n, su.mean.end());
            p.std.assign(su.std.end() - n, su.std.end());
            p.reference = u_final;
            p.title = "u_" + label + " (t=1)";
            emit_plot(p, art.path("fig_u_" + label + ".svg"));
            row.metrics = {{"err_k", mk.err},       {"err_f", mf.err},
                           {"err_u", mu.err},       {"cov_k", mk.cov},
                           {"cov_f", mf.cov},       {"cov_u", mu.cov},
                           {"std_k", mk.std_avg},   {"std_f", mf.std_avg},
                           {"std_u", mu.std_avg},   {"acceptance", samples.acceptance_rate},
                           {"step", samples.adapted_step_size}};
        } else {
            auto sf = slice_summary(fdraws, 0, n);
            std::vector<double> f_sx(base.v_data.indices.size()), f_sy = base.v_data.values;
            for (std::size_t i = 0; i < f_sx.size(); ++i) f_sx[i] = grid[base.v_data.indices[i]];
            auto mf = emit_target(art, "f_" + label, grid, sf, f_true, f_sx, f_sy);
            auto su = operator_u_summary(model, fdraws, u_coords);
            std::vector<double> u_sx;
            for (const auto& c : base.u_data.coords) u_sx.push_back(c[0]);
            auto mu = emit_target(art, "u_" + label, u_axis, su, u_ref, u_sx, base.u_data.values);
            row.metrics = {{"err_f", mf.err},       {"err_u", mu.err},
                           {"cov_f", mf.cov},       {"cov_u", mu.cov},
                           {"std_f", mf.std_avg},   {"std_u", mu.std_avg},
                           {"acceptance", samples.acceptance_rate},
                           {"step", samples.adapted_step_size}};
        }
        report.rows.push_back(std::move(row));
    };

    std::size_t row_idx = 0;
    run_row("posterior", base, row_idx++);
    for (const auto& b : cfg.baselines) {
        if (b == "non-synergistic") {
            bayes::OperatorPosterior post = base;
            post.include_u_likelihood = false;
            run_row("non-synergistic", post, row_idx++);
        } else if (b == "misspecified") {
            bayes::OperatorPosterior post = base;
            post.v_data.sigma = cfg.misspecified_sigma_in;
            if (hetero) post.w_data.sigma = cfg.misspecified_sigma_in;
            run_row("misspecified", post, row_idx++);
        } else {
            throw InvalidInput("operator experiments: unknown baseline " + b);
        }
    }
}

}  // namespace

double train_operator_checkpoint(const ExperimentConfig& cfg) {
    const bool hetero = cfg.experiment == ExperimentId::E5RdHeteroOperator;
    if (!hetero && cfg.experiment != ExperimentId::E4RdConstantOperator)
        throw InvalidInput("train-operator requires an operator experiment config");
    auto [train_c, test_c] = pde::build_operator_corpus(
        hetero ? pde::CorpusProblem::RdHetero : pde::CorpusProblem::RdConstant, cfg.corpus_train,
        cfg.corpus_test, cfg.data_seed, cfg.grid_n);
    nn::OperatorDataset train = corpus_to_dataset(train_c);
    nn::OperatorDataset test = corpus_to_dataset(test_c);

    nn::NetworkSpec spec;
    spec.kind = hetero ? nn::NetworkKind::MioDeepONet : nn::NetworkKind::DeepONet;
    spec.latent_p = cfg.latent_p;
    spec.output_bias = true;
    spec.branch = nn::MlpSpec{static_cast<int>(cfg.grid_n), static_cast<int>(cfg.latent_p),
                             {static_cast<int>(cfg.branch_width)}, nn::Activation::Tanh};
    if (hetero) spec.branch2 = spec.branch;
    spec.trunk = nn::MlpSpec{hetero ? 2 : 1, static_cast<int>(cfg.latent_p),
                             {static_cast<int>(cfg.trunk_width)}, nn::Activation::Tanh};

    nn::TrainConfig tc;
    tc.iterations = cfg.train_iterations;
    tc.batch_functions = cfg.batch_functions;
    tc.batch_points = cfg.batch_points;
    tc.adam.lr = cfg.train_lr;
    tc.seed = cfg.seed;
    nn::OperatorModel model = nn::train_operator(spec, train, test, tc);
    nn::save_checkpoint(model, cfg.checkpoint_path);
    return model.test_rel_l2;
}

PinnResult train_pinn_deterministic(const ExperimentConfig& cfg, const std::string& scenario,
                                    std::uint64_t seed) {
    pde::PoissonTruth truth;
    truth.kappa = cfg.kappa;
    truth.lambda = cfg.lambda;

    auto xf = linspace(0.0, 1.0, cfg.n_f);
    std::vector<double> fy(cfg.n_f);
    for (std::size_t i = 0; i < cfg.n_f; ++i) fy[i] = truth.f(xf[i]);
    double sx = 0.0, sy = 0.0;
    if (scenario == "noisy-output")
        sy = cfg.pinn_noise_out;
    else if (scenario == "noisy-input")
        sx = cfg.pinn_noise_in;
    else if (scenario != "clean")
        throw InvalidInput("pinn scenario must be clean | noisy-output | noisy-input");
    auto data = pde::make_noisy(xf, fy, sx, sy, cfg.data_seed * 2 + 5 + seed);

    // Weighted PINN loss + L2 decay, expressed as a MAP objective:
    // unit residual weight and a Gaussian parameter prior matching the decay.
    bayes::PoissonBpinnPosterior post;
    post.net = nn::MlpSpec{1, 1, std::vector<int>(cfg.hidden_layers, static_cast<int>(cfg.hidden_width)),
                           nn::Activation::Tanh};
    post.kappa = cfg.kappa;
    post.lambda = cfg.lambda;
    post.mode = bayes::InferenceMode::IgnoreInputNoise;
    post.bc_left = truth.u(0.0);
    post.bc_right = truth.u(1.0);
    post.f_data.x = data.inputs.noisy;
    post.f_data.y = data.outputs.noisy;
    post.f_data.noise.sigma_out = 1.0;
    post.theta_prior_std =
        cfg.pinn_weight_decay > 0.0
            ? 1.0 / std::sqrt(2.0 * cfg.pinn_weight_decay * static_cast<double>(cfg.n_f))
            : 1e6;

    nn::AdamConfig acfg;
    acfg.lr = cfg.pinn_lr;
    auto res = mcmc::map_estimate(post.density(), post.initial_point(seed), acfg,
                                  cfg.pinn_iterations);

    const auto grid = linspace(0.0, 1.0, 256);
    std::vector<double> pu(grid.size()), pf(grid.size()), ru(grid.size()), rf(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        pu[i] = post.predict_u(res.params, grid[i]);
        pf[i] = post.predict_f(res.params, grid[i]);
        ru[i] = truth.u(grid[i]);
        rf[i] = truth.f(grid[i]);
    }
    return {relative_l2(pu, ru), relative_l2(pf, rf), res.final_objective};
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.out_dir);
    ArtifactTracker art{cfg.out_dir, {}};

    RunReport report;
    report.experiment = to_string(cfg.experiment);
    report.seed = cfg.seed;
    report.config_hash = config_hash(cfg);
    report.canonical_config = canonical_config_text(cfg);

    try {
        switch (cfg.experiment) {
            case ExperimentId::E1Regression:
                run_e1(cfg, art, report);
                break;
            case ExperimentId::E2PoissonForward:
                run_poisson(cfg, art, report, false);
                break;
            case ExperimentId::E3PoissonInverse:
                run_poisson(cfg, art, report, true);
                break;
            case ExperimentId::E4RdConstantOperator:
                run_operator(cfg, art, report, false);
                break;
            case ExperimentId::E5RdHeteroOperator:
                run_operator(cfg, art, report, true);
                break;
        }
    } catch (const std::exception& e) {
        art.discard_all();
        throw Error(to_string(cfg.experiment) + " failed: " + e.what());
    }

    report.artifacts = art.names;
    report.artifacts.push_back("report.txt");
    report.artifacts.push_back("report.json");
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(report, cfg.out_dir);
    return report;
}

}  // namespace niuq::cli
