#include "niuq/nn/train.hpp"

#include <cmath>

#include "niuq/nn/mlp.hpp"
#include "niuq/rng.hpp"

namespace niuq::nn {

namespace {

struct SubnetView {
    const MlpSpec* spec;
    std::size_t offset;  // into the flat parameter array
};

SubnetView view(const ParamLayout& layout, const MlpSpec& m, const std::string& prefix) {
    return {&m, layout.find(prefix + ".w0").offset};
}

}  // namespace

double operator_test_error(const OperatorModel& model, const OperatorDataset& data) {
    const bool mio = model.spec.kind == NetworkKind::MioDeepONet;
    double acc = 0.0;
    for (std::size_t s = 0; s < data.inputs.size(); ++s) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < data.eval_coords.size(); ++j) {
            const double pred =
                mio ? mio_deeponet_forward(model, data.inputs[s], data.inputs2[s], data.eval_coords[j])
                    : deeponet_forward(model, data.inputs[s], data.eval_coords[j]);
            const double ref = data.targets[s][j];
            num += (pred - ref) * (pred - ref);
            den += ref * ref;
        }
        acc += den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return data.inputs.empty() ? 0.0 : acc / static_cast<double>(data.inputs.size());
}

OperatorModel train_operator(const NetworkSpec& spec, const OperatorDataset& train,
                             const OperatorDataset& test, const TrainConfig& cfg) {
    spec.validate();
    if (train.inputs.empty()) throw InvalidInput("train_operator: empty training set");
    const bool mio = spec.kind == NetworkKind::MioDeepONet;
    if (mio && train.inputs2.size() != train.inputs.size())
        throw ShapeError("train_operator: mio requires a second input function per sample");

    Rng rng(cfg.seed);
    OperatorModel model;
    model.spec = spec;
    model.sensor_grid = train.sensor_grid;
    model.params = init_params(spec, rng);
    model.train_seed = cfg.seed;
    model.train_iterations = cfg.iterations;

    auto& params = model.params.data;
    const auto& layout = model.params.layout;
    SubnetView b1 = view(layout, spec.branch, mio ? "branch1" : "branch");
    SubnetView b2 = mio ? view(layout, spec.branch2, "branch2") : SubnetView{nullptr, 0};
    SubnetView tr = view(layout, spec.trunk, "trunk");
    const std::size_t bias_off = spec.output_bias ? layout.find("output_bias").offset : 0;
    const int p = spec.latent_p;

    AdamState state(params.size());
    std::vector<double> grad(params.size());

    const std::size_t n_coords = train.eval_coords.size();
    const std::size_t nf = std::min(cfg.batch_functions, train.inputs.size());
    const std::size_t np =
        cfg.batch_points == 0 ? n_coords : std::min(cfg.batch_points, n_coords);

    std::vector<std::size_t> fidx(nf), pidx(np);
    std::vector<MlpCache> c1(nf), c2(nf), ct(np);
    std::vector<std::vector<double>> fb1(nf), fb2(nf), ft(np);
    std::vector<std::vector<double>> db1(nf), db2(nf), dt(np);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (auto& f : fidx) f = rng.index(train.inputs.size());
        if (np == n_coords)
            for (std::size_t j = 0; j < np; ++j) pidx[j] = j;
        else
            for (auto& j : pidx) j = rng.index(n_coords);

        auto sub = [&](const SubnetView& v) {
            return std::span<const double>(params.data() + v.offset, v.spec->param_count());
        };
        for (std::size_t a = 0; a < nf; ++a) {
            fb1[a] = mlp_forward_cached(*b1.spec, sub(b1), train.inputs[fidx[a]], c1[a]);
            if (mio) fb2[a] = mlp_forward_cached(*b2.spec, sub(b2), train.inputs2[fidx[a]], c2[a]);
            db1[a].assign(p, 0.0);
            if (mio) db2[a].assign(p, 0.0);
        }
        for (std::size_t b = 0; b < np; ++b) {
            ft[b] = mlp_forward_cached(*tr.spec, sub(tr), train.eval_coords[pidx[b]], ct[b]);
            dt[b].assign(p, 0.0);
        }

        std::fill(grad.begin(), grad.end(), 0.0);
        const double bias = spec.output_bias ? params[bias_off] : 0.0;
        const double inv_n = 1.0 / static_cast<double>(nf * np);
        double loss = 0.0, dbias = 0.0;
        for (std::size_t a = 0; a < nf; ++a) {
            for (std::size_t b = 0; b < np; ++b) {
                double pred = bias;
                if (mio)
                    for (int k = 0; k < p; ++k) pred += fb1[a][k] * fb2[a][k] * ft[b][k];
                else
                    for (int k = 0; k < p; ++k) pred += fb1[a][k] * ft[b][k];
                const double r = pred - train.targets[fidx[a]][pidx[b]];
                loss += r * r * inv_n;
                const double d = 2.0 * r * inv_n;
                dbias += d;
                if (mio) {
                    for (int k = 0; k < p; ++k) {
                        db1[a][k] += d * fb2[a][k] * ft[b][k];
                        db2[a][k] += d * fb1[a][k] * ft[b][k];
                        dt[b][k] += d * fb1[a][k] * fb2[a][k];
                    }
                } else {
                    for (int k = 0; k < p; ++k) {
                        db1[a][k] += d * ft[b][k];
                        dt[b][k] += d * fb1[a][k];
                    }
                }
            }
        }
        if (!std::isfinite(loss)) throw TrainingDiverged("train_operator: loss is not finite");

        auto gsub = [&](const SubnetView& v) {
            return std::span<double>(grad.data() + v.offset, v.spec->param_count());
        };
        for (std::size_t a = 0; a < nf; ++a) {
            mlp_backward(*b1.spec, sub(b1), c1[a], db1[a], gsub(b1));
            if (mio) mlp_backward(*b2.spec, sub(b2), c2[a], db2[a], gsub(b2));
        }
        for (std::size_t b = 0; b < np; ++b)
            mlp_backward(*tr.spec, sub(tr), ct[b], dt[b], gsub(tr));
        if (spec.output_bias) grad[bias_off] = dbias;

        AdamConfig step_cfg = cfg.adam;
        const double frac = static_cast<double>(it) / static_cast<double>(cfg.iterations);
        const double floor = cfg.lr_floor_fraction;
        step_cfg.lr = cfg.adam.lr * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac)));
        adam_step(params, grad, state, step_cfg);
        if (it % 100 == 0) model.loss_history.push_back(loss);
    }

    model.test_rel_l2 = test.inputs.empty() ? 0.0 : operator_test_error(model, test);
    return model;
}

}  // namespace niuq::nn
