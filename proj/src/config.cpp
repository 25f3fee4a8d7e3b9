#include "niuq/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace niuq::cli {

std::string to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::E1Regression: return "E1-regression";
        case ExperimentId::E2PoissonForward: return "E2-poisson-forward";
        case ExperimentId::E3PoissonInverse: return "E3-poisson-inverse";
        case ExperimentId::E4RdConstantOperator: return "E4-rd-constant-operator";
        case ExperimentId::E5RdHeteroOperator: return "E5-rd-hetero-operator";
    }
    throw InvalidInput("unknown experiment id");
}

ExperimentId experiment_from_string(const std::string& s) {
    for (ExperimentId id :
         {ExperimentId::E1Regression, ExperimentId::E2PoissonForward, ExperimentId::E3PoissonInverse,
          ExperimentId::E4RdConstantOperator, ExperimentId::E5RdHeteroOperator})
        if (s == to_string(id)) return id;
    throw InvalidInput("unknown experiment: " + s);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap doc;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InvalidInput("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            doc[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw InvalidInput("config line " + std::to_string(lineno) +
                               ": key outside any [section]");
        doc[section][key] = value;
    }
    return doc;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidInput("config: " + key + " is not a number: " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        std::uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw InvalidInput("config: " + key + " is not an integer: " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidInput("config: " + key + " is not a boolean: " + v);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig default_config(ExperimentId id) {
    ExperimentConfig c;
    c.experiment = id;
    using M = bayes::InferenceMode;
    switch (id) {
        case ExperimentId::E1Regression:
            c.modes = {M::IgnoreInputNoise, M::ModelInputNoise, M::RecastTaylor};
            c.baselines = {};
            c.n_u = 32;
            c.sigma_in_u = 0.03;
            c.sigma_out_u = 0.05;
            c.hidden_layers = 2;
            c.hidden_width = 50;
            c.hmc.num_samples = 500;
            c.hmc.burn_in = 500;
            c.hmc.leapfrog_steps = 30;
            c.hmc.step_size = 2e-3;
            break;
        case ExperimentId::E2PoissonForward:
            c.modes = {M::IgnoreInputNoise, M::ModelInputNoise, M::RecastTaylor};
            c.n_f = 51;
            c.n_u = 0;
            c.sigma_in_f = 0.01;
            c.sigma_out_f = 0.05;
            c.hidden_layers = 2;
            c.hidden_width = 20;
            c.hmc.num_samples = 800;
            c.hmc.burn_in = 800;
            c.hmc.leapfrog_steps = 50;
            c.hmc.step_size = 2e-3;
            break;
        case ExperimentId::E3PoissonInverse:
            c.modes = {M::IgnoreInputNoise, M::ModelInputNoise, M::RecastTaylor};
            c.n_f = 51;
            c.sigma_in_f = 0.0;
            c.sigma_out_f = 0.05;
            c.n_u = 10;
            c.sigma_in_u = 0.02;
            c.sigma_out_u = 0.05;
            c.hidden_layers = 2;
            c.hidden_width = 20;
            c.hmc.num_samples = 800;
            c.hmc.burn_in = 800;
            c.hmc.leapfrog_steps = 50;
            c.hmc.step_size = 2e-3;
            break;
        case ExperimentId::E4RdConstantOperator:
            c.baselines = {"non-synergistic", "misspecified"};
            c.checkpoint_path = "checkpoint_e4.json";
            c.meas_f = 6;
            c.meas_u = 3;
            c.meas_sigma_f = 0.2;
            c.meas_sigma_u = 0.05;
            c.corpus_train = 400;
            c.branch_width = 128;
            c.trunk_width = 128;
            c.latent_p = 64;
            c.train_iterations = 80000;
            c.batch_functions = 16;
            c.train_lr = 3e-3;
            c.batch_points = 50;
            c.hmc.num_samples = 500;
            c.hmc.burn_in = 500;
            c.hmc.leapfrog_steps = 30;
            c.hmc.step_size = 0.02;
            break;
        case ExperimentId::E5RdHeteroOperator:
            c.baselines = {"non-synergistic"};
            c.checkpoint_path = "checkpoint_e5.json";
            c.meas_k = 2;
            c.meas_f = 5;
            c.meas_u = 30;
            c.meas_sigma_k = 0.05;
            c.meas_sigma_f = 0.05;
            c.meas_sigma_u = 0.05;
            c.corpus_train = 1000;
            c.branch_width = 128;
            c.trunk_width = 128;
            c.latent_p = 64;
            c.train_iterations = 60000;
            c.batch_functions = 32;
            c.train_lr = 2e-3;
            c.batch_points = 100;
            c.hmc.num_samples = 500;
            c.hmc.burn_in = 500;
            c.hmc.leapfrog_steps = 30;
            c.hmc.step_size = 0.02;
            break;
    }
    return c;
}

void apply_overrides(ExperimentConfig& cfg, const ConfigMap& doc) {
    for (const auto& [section, kvs] : doc) {
        for (const auto& [key, value] : kvs) {
            const std::string full = section + "." + key;
            if (full == "run.experiment") {
                cfg.experiment = experiment_from_string(value);
            } else if (full == "run.modes") {
                cfg.modes.clear();
                for (const auto& m : split_list(value)) cfg.modes.push_back(bayes::mode_from_string(m));
            } else if (full == "run.baselines") {
                cfg.baselines = split_list(value);
            } else if (full == "run.seed") {
                cfg.seed = to_u64(full, value);
            } else if (full == "run.out") {
                cfg.out_dir = value;
            } else if (full == "net.hidden_layers") {
                cfg.hidden_layers = to_u64(full, value);
            } else if (full == "net.hidden_width") {
                cfg.hidden_width = to_u64(full, value);
            } else if (full == "prior.theta_std") {
                cfg.theta_prior_std = to_double(full, value);
            } else if (full == "prior.chi_std") {
                cfg.chi_prior_std = to_double(full, value);
            } else if (full == "data.n_u") {
                cfg.n_u = to_u64(full, value);
            } else if (full == "data.n_f") {
                cfg.n_f = to_u64(full, value);
            } else if (full == "data.sigma_in_u") {
                cfg.sigma_in_u = to_double(full, value);
            } else if (full == "data.sigma_out_u") {
                cfg.sigma_out_u = to_double(full, value);
            } else if (full == "data.sigma_in_f") {
                cfg.sigma_in_f = to_double(full, value);
            } else if (full == "data.sigma_out_f") {
                cfg.sigma_out_f = to_double(full, value);
            } else if (full == "data.seed") {
                cfg.data_seed = to_u64(full, value);
            } else if (full == "physics.kappa") {
                cfg.kappa = to_double(full, value);
            } else if (full == "physics.lambda") {
                cfg.lambda = to_double(full, value);
            } else if (full == "physics.lambda_true") {
                cfg.lambda_true = to_double(full, value);
            } else if (full == "hmc.leapfrog_steps") {
                cfg.hmc.leapfrog_steps = to_u64(full, value);
            } else if (full == "hmc.num_samples") {
                cfg.hmc.num_samples = to_u64(full, value);
            } else if (full == "hmc.burn_in") {
                cfg.hmc.burn_in = to_u64(full, value);
            } else if (full == "hmc.step_size") {
                cfg.hmc.step_size = to_double(full, value);
            } else if (full == "baseline.dropout_rate") {
                cfg.dropout_rate = to_double(full, value);
            } else if (full == "baseline.dropout_passes") {
                cfg.dropout_passes = to_u64(full, value);
            } else if (full == "baseline.dropout_train_iterations") {
                cfg.dropout_train_iterations = to_u64(full, value);
            } else if (full == "baseline.dropout_lr") {
                cfg.dropout_lr = to_double(full, value);
            } else if (full == "baseline.map_iterations") {
                cfg.map_iterations = to_u64(full, value);
            } else if (full == "baseline.map_lr") {
                cfg.map_lr = to_double(full, value);
            } else if (full == "baseline.misspecified_sigma_in") {
                cfg.misspecified_sigma_in = to_double(full, value);
            } else if (full == "pinn.iterations") {
                cfg.pinn_iterations = to_u64(full, value);
            } else if (full == "pinn.lr") {
                cfg.pinn_lr = to_double(full, value);
            } else if (full == "pinn.weight_decay") {
                cfg.pinn_weight_decay = to_double(full, value);
            } else if (full == "pinn.noise_in") {
                cfg.pinn_noise_in = to_double(full, value);
            } else if (full == "pinn.noise_out") {
                cfg.pinn_noise_out = to_double(full, value);
            } else if (full == "operator.checkpoint") {
                cfg.checkpoint_path = value;
            } else if (full == "operator.train_first") {
                cfg.train_first = to_bool(full, value);
            } else if (full == "operator.corpus_train") {
                cfg.corpus_train = to_u64(full, value);
            } else if (full == "operator.corpus_test") {
                cfg.corpus_test = to_u64(full, value);
            } else if (full == "operator.grid_n") {
                cfg.grid_n = to_u64(full, value);
            } else if (full == "operator.latent_p") {
                cfg.latent_p = to_u64(full, value);
            } else if (full == "operator.branch_width") {
                cfg.branch_width = to_u64(full, value);
            } else if (full == "operator.trunk_width") {
                cfg.trunk_width = to_u64(full, value);
            } else if (full == "operator.train_iterations") {
                cfg.train_iterations = to_u64(full, value);
            } else if (full == "operator.batch_functions") {
                cfg.batch_functions = to_u64(full, value);
            } else if (full == "operator.batch_points") {
                cfg.batch_points = to_u64(full, value);
            } else if (full == "operator.train_lr") {
                cfg.train_lr = to_double(full, value);
            } else if (full == "operator.meas_k") {
                cfg.meas_k = to_u64(full, value);
            } else if (full == "operator.meas_f") {
                cfg.meas_f = to_u64(full, value);
            } else if (full == "operator.meas_u") {
                cfg.meas_u = to_u64(full, value);
            } else if (full == "operator.meas_sigma_k") {
                cfg.meas_sigma_k = to_double(full, value);
            } else if (full == "operator.meas_sigma_f") {
                cfg.meas_sigma_f = to_double(full, value);
            } else if (full == "operator.meas_sigma_u") {
                cfg.meas_sigma_u = to_double(full, value);
            } else if (full == "operator.grf_length") {
                cfg.grf_length = to_double(full, value);
            } else if (full == "operator.truth_seed") {
                cfg.truth_seed = to_u64(full, value);
            } else {
                throw InvalidInput("config: unknown key " + full);
            }
        }
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    ConfigMap doc = parse_config_file(path);
    auto run = doc.find("run");
    if (run == doc.end() || !run->second.count("experiment"))
        throw InvalidInput("config: run.experiment is required");
    ExperimentConfig cfg = default_config(experiment_from_string(run->second.at("experiment")));
    apply_overrides(cfg, doc);
    return cfg;
}

std::string canonical_config_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[run]\n";
    o << "experiment = " << to_string(c.experiment) << "\n";
    o << "modes = ";
    for (std::size_t i = 0; i < c.modes.size(); ++i)
        o << (i ? "," : "") << bayes::to_string(c.modes[i]);
    o << "\n";
    o << "baselines = ";
    for (std::size_t i = 0; i < c.baselines.size(); ++i) o << (i ? "," : "") << c.baselines[i];
    o << "\n";
    o << "seed = " << c.seed << "\n";
    o << "out = " << c.out_dir << "\n";
    o << "[net]\n";
    o << "hidden_layers = " << c.hidden_layers << "\n";
    o << "hidden_width = " << c.hidden_width << "\n";
    o << "[prior]\n";
    o << "theta_std = " << fmt(c.theta_prior_std) << "\n";
    o << "chi_std = " << fmt(c.chi_prior_std) << "\n";
    o << "[data]\n";
    o << "n_u = " << c.n_u << "\n";
    o << "n_f = " << c.n_f << "\n";
    o << "sigma_in_u = " << fmt(c.sigma_in_u) << "\n";
    o << "sigma_out_u = " << fmt(c.sigma_out_u) << "\n";
    o << "sigma_in_f = " << fmt(c.sigma_in_f) << "\n";
    o << "sigma_out_f = " << fmt(c.sigma_out_f) << "\n";
    o << "seed = " << c.data_seed << "\n";
    o << "[physics]\n";
    o << "kappa = " << fmt(c.kappa) << "\n";
    o << "lambda = " << fmt(c.lambda) << "\n";
    o << "lambda_true = " << fmt(c.lambda_true) << "\n";
    o << "[hmc]\n";
    o << "leapfrog_steps = " << c.hmc.leapfrog_steps << "\n";
    o << "num_samples = " << c.hmc.num_samples << "\n";
    o << "burn_in = " << c.hmc.burn_in << "\n";
    o << "step_size = " << fmt(c.hmc.step_size) << "\n";
    o << "[baseline]\n";
    o << "dropout_rate = " << fmt(c.dropout_rate) << "\n";
    o << "dropout_passes = " << c.dropout_passes << "\n";
    o << "dropout_train_iterations = " << c.dropout_train_iterations << "\n";
    o << "dropout_lr = " << fmt(c.dropout_lr) << "\n";
    o << "map_iterations = " << c.map_iterations << "\n";
    o << "map_lr = " << fmt(c.map_lr) << "\n";
    o << "misspecified_sigma_in = " << fmt(c.misspecified_sigma_in) << "\n";
    o << "[pinn]\n";
    o << "iterations = " << c.pinn_iterations << "\n";
    o << "lr = " << fmt(c.pinn_lr) << "\n";
    o << "weight_decay = " << fmt(c.pinn_weight_decay) << "\n";
    o << "noise_in = " << fmt(c.pinn_noise_in) << "\n";
    o << "noise_out = " << fmt(c.pinn_noise_out) << "\n";
    o << "[operator]\n";
    o << "checkpoint = " << c.checkpoint_path << "\n";
    o << "train_first = " << (c.train_first ? "true" : "false") << "\n";
    o << "corpus_train = " << c.corpus_train << "\n";
    o << "corpus_test = " << c.corpus_test << "\n";
    o << "grid_n = " << c.grid_n << "\n";
    o << "latent_p = " << c.latent_p << "\n";
    o << "branch_width = " << c.branch_width << "\n";
    o << "trunk_width = " << c.trunk_width << "\n";
    o << "train_iterations = " << c.train_iterations << "\n";
    o << "batch_functions = " << c.batch_functions << "\n";
    o << "batch_points = " << c.batch_points << "\n";
    o << "train_lr = " << fmt(c.train_lr) << "\n";
    o << "meas_k = " << c.meas_k << "\n";
    o << "meas_f = " << c.meas_f << "\n";
    o << "meas_u = " << c.meas_u << "\n";
    o << "meas_sigma_k = " << fmt(c.meas_sigma_k) << "\n";
    o << "meas_sigma_f = " << fmt(c.meas_sigma_f) << "\n";
    o << "meas_sigma_u = " << fmt(c.meas_sigma_u) << "\n";
    o << "grf_length = " << fmt(c.grf_length) << "\n";
    o << "truth_seed = " << c.truth_seed << "\n";
    return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace niuq::cli
