#include "niuq/nn/deeponet.hpp"

#include "niuq/nn/mlp.hpp"

namespace niuq::nn {

namespace {

std::span<const double> slice_of(const ParamVector& p, const MlpSpec& m, const std::string& prefix) {
    // MLP slices of one subnetwork are contiguous: from .w0 to the last bias.
    const Slice& first = p.layout.find(prefix + ".w0");
    return {p.data.data() + first.offset, m.param_count()};
}

double output_bias(const OperatorModel& model) {
    if (!model.spec.output_bias) return 0.0;
    const Slice& s = model.params.layout.find("output_bias");
    return model.params.data[s.offset];
}

}  // namespace

std::vector<double> trunk_features(const OperatorModel& model, std::span<const double> x) {
    return mlp_forward(model.spec.trunk, slice_of(model.params, model.spec.trunk, "trunk"), x);
}

double deeponet_forward(const OperatorModel& model, std::span<const double> v,
                        std::span<const double> x) {
    if (model.spec.kind != NetworkKind::DeepONet)
        throw ShapeError("deeponet_forward: model is not a vanilla deeponet");
    if (v.size() != model.sensor_grid.size())
        throw ShapeError("deeponet_forward: input function not on the sensor grid");
    auto b = mlp_forward(model.spec.branch, slice_of(model.params, model.spec.branch, "branch"), v);
    auto t = trunk_features(model, x);
    double s = output_bias(model);
    for (int k = 0; k < model.spec.latent_p; ++k) s += b[k] * t[k];
    return s;
}

double mio_deeponet_forward(const OperatorModel& model, std::span<const double> k,
                            std::span<const double> f, std::span<const double> x) {
    if (model.spec.kind != NetworkKind::MioDeepONet)
        throw ShapeError("mio_deeponet_forward: model is not a multi-input deeponet");
    if (k.size() != model.sensor_grid.size() || f.size() != model.sensor_grid.size())
        throw ShapeError("mio_deeponet_forward: input functions not on the sensor grid");
    auto b1 = mlp_forward(model.spec.branch, slice_of(model.params, model.spec.branch, "branch1"), k);
    auto b2 = mlp_forward(model.spec.branch2, slice_of(model.params, model.spec.branch2, "branch2"), f);
    auto t = trunk_features(model, x);
    double s = output_bias(model);
    for (int j = 0; j < model.spec.latent_p; ++j) s += b1[j] * b2[j] * t[j];
    return s;
}

namespace {

std::vector<ad::Var> branch_var(const OperatorModel& model, const MlpSpec& m,
                                const std::string& prefix, std::span<const ad::Var> v) {
    if (v.empty()) throw ShapeError("operator forward: empty input");
    ad::Tape& tape = *v[0].tape;
    auto p = slice_of(model.params, m, prefix);
    std::vector<ad::Var> leaves;
    leaves.reserve(p.size());
    for (double w : p) leaves.push_back(tape.constant(w));
    return mlp_var_forward(m, leaves, v);
}

}  // namespace

ad::Var deeponet_forward_var(const OperatorModel& model, std::span<const ad::Var> v,
                             std::span<const double> trunk_feat) {
    if (v.size() != model.sensor_grid.size())
        throw ShapeError("deeponet_forward_var: input function not on the sensor grid");
    auto b = branch_var(model, model.spec.branch, "branch", v);
    ad::Tape& tape = *v[0].tape;
    ad::Var s = tape.constant(output_bias(model));
    for (int k = 0; k < model.spec.latent_p; ++k) s = s + b[k] * trunk_feat[k];
    return s;
}

ad::Var mio_deeponet_forward_var(const OperatorModel& model, std::span<const ad::Var> k,
                                 std::span<const ad::Var> f, std::span<const double> trunk_feat) {
    if (k.size() != model.sensor_grid.size() || f.size() != model.sensor_grid.size())
        throw ShapeError("mio_deeponet_forward_var: input functions not on the sensor grid");
    auto b1 = branch_var(model, model.spec.branch, "branch1", k);
    auto b2 = branch_var(model, model.spec.branch2, "branch2", f);
    ad::Tape& tape = *k[0].tape;
    ad::Var s = tape.constant(output_bias(model));
    for (int j = 0; j < model.spec.latent_p; ++j) s = s + b1[j] * (b2[j] * trunk_feat[j]);
    return s;
}

}  // namespace niuq::nn
