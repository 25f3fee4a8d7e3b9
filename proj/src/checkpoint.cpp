#include "niuq/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace niuq::nn {

using nlohmann::json;

std::string double_to_hex(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[bits & 0xf];
        bits >>= 4;
    }
    return s;
}

double hex_to_double(const std::string& s) {
    if (s.size() != 16) throw IoError("hex double must have 16 digits");
    std::uint64_t bits = 0;
    for (char c : s) {
        bits <<= 4;
        if (c >= '0' && c <= '9') bits |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') bits |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw IoError("invalid hex digit in checkpoint");
    }
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

namespace {

json mlp_to_json(const MlpSpec& m) {
    return {{"in", m.in}, {"out", m.out}, {"hidden", m.hidden}, {"activation", to_string(m.act)}};
}

MlpSpec mlp_from_json(const json& j) {
    MlpSpec m;
    m.in = j.at("in").get<int>();
    m.out = j.at("out").get<int>();
    m.hidden = j.at("hidden").get<std::vector<int>>();
    m.act = activation_from_string(j.at("activation").get<std::string>());
    return m;
}

}  // namespace

void save_checkpoint(const OperatorModel& model, const std::string& path) {
    json j;
    j["format"] = "niuq-checkpoint-v1";
    json spec;
    spec["kind"] = to_string(model.spec.kind);
    spec["latent_p"] = model.spec.latent_p;
    spec["output_bias"] = model.spec.output_bias;
    switch (model.spec.kind) {
        case NetworkKind::Mlp:
            spec["mlp"] = mlp_to_json(model.spec.mlp);
            break;
        case NetworkKind::DeepONet:
            spec["branch"] = mlp_to_json(model.spec.branch);
            spec["trunk"] = mlp_to_json(model.spec.trunk);
            break;
        case NetworkKind::MioDeepONet:
            spec["branch"] = mlp_to_json(model.spec.branch);
            spec["branch2"] = mlp_to_json(model.spec.branch2);
            spec["trunk"] = mlp_to_json(model.spec.trunk);
            break;
    }
    j["spec"] = spec;
    json layout = json::array();
    for (const auto& s : model.params.layout.slices)
        layout.push_back({{"name", s.name}, {"offset", s.offset}, {"len", s.len}});
    j["layout"] = layout;
    std::string blob;
    blob.reserve(model.params.data.size() * 16);
    for (double v : model.params.data) blob += double_to_hex(v);
    j["params_hex"] = blob;
    json grid = json::array();
    for (double g : model.sensor_grid) grid.push_back(double_to_hex(g));
    j["sensor_grid_hex"] = grid;
    j["metadata"] = {{"test_rel_l2", model.test_rel_l2},
                     {"train_seed", model.train_seed},
                     {"train_iterations", model.train_iterations},
                     {"loss_history", model.loss_history}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump(1) << "\n";
}

OperatorModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read checkpoint: " + path);
    json j;
    in >> j;
    if (j.value("format", "") != "niuq-checkpoint-v1") throw IoError("unknown checkpoint format");
    OperatorModel model;
    const json& spec = j.at("spec");
    model.spec.kind = network_kind_from_string(spec.at("kind").get<std::string>());
    model.spec.latent_p = spec.at("latent_p").get<int>();
    model.spec.output_bias = spec.at("output_bias").get<bool>();
    switch (model.spec.kind) {
        case NetworkKind::Mlp:
            model.spec.mlp = mlp_from_json(spec.at("mlp"));
            break;
        case NetworkKind::DeepONet:
            model.spec.branch = mlp_from_json(spec.at("branch"));
            model.spec.trunk = mlp_from_json(spec.at("trunk"));
            break;
        case NetworkKind::MioDeepONet:
            model.spec.branch = mlp_from_json(spec.at("branch"));
            model.spec.branch2 = mlp_from_json(spec.at("branch2"));
            model.spec.trunk = mlp_from_json(spec.at("trunk"));
            break;
    }
    for (const auto& s : j.at("layout"))
        model.params.layout.slices.push_back(
            {s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
             s.at("len").get<std::size_t>()});
    const std::string& blob = j.at("params_hex").get_ref<const std::string&>();
    if (blob.size() % 16 != 0) throw IoError("corrupt parameter blob");
    model.params.data.resize(blob.size() / 16);
    for (std::size_t i = 0; i < model.params.data.size(); ++i)
        model.params.data[i] = hex_to_double(blob.substr(i * 16, 16));
    for (const auto& g : j.at("sensor_grid_hex"))
        model.sensor_grid.push_back(hex_to_double(g.get<std::string>()));
    const json& meta = j.at("metadata");
    model.test_rel_l2 = meta.at("test_rel_l2").get<double>();
    model.train_seed = meta.at("train_seed").get<std::uint64_t>();
    model.train_iterations = meta.at("train_iterations").get<std::size_t>();
    model.loss_history = meta.at("loss_history").get<std::vector<double>>();
    if (model.params.data.size() != model.params.layout.total())
        throw IoError("checkpoint layout does not cover the parameter array");
    return model;
}

}  // namespace niuq::nn
