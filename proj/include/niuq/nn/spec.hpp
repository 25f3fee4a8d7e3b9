#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "niuq/errors.hpp"
#include "niuq/rng.hpp"

namespace niuq::nn {

enum class Activation { Tanh, Relu };

inline std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }
inline Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw InvalidInput("unknown activation: " + s);
}

// Fully connected feed-forward net: in -> hidden... -> out, final layer affine.
struct MlpSpec {
    int in = 1;
    int out = 1;
    std::vector<int> hidden;
    Activation act = Activation::Tanh;

    std::vector<int> widths() const {
        std::vector<int> w;
        w.push_back(in);
        for (int h : hidden) w.push_back(h);
        w.push_back(out);
        return w;
    }

    std::size_t param_count() const {
        auto w = widths();
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < w.size(); ++l)
            n += static_cast<std::size_t>(w[l]) * w[l + 1] + w[l + 1];
        return n;
    }
};

enum class NetworkKind { Mlp, DeepONet, MioDeepONet };

inline std::string to_string(NetworkKind k) {
    switch (k) {
        case NetworkKind::Mlp: return "mlp";
        case NetworkKind::DeepONet: return "deeponet";
        default: return "mio-deeponet";
    }
}
inline NetworkKind network_kind_from_string(const std::string& s) {
    if (s == "mlp") return NetworkKind::Mlp;
    if (s == "deeponet") return NetworkKind::DeepONet;
    if (s == "mio-deeponet") return NetworkKind::MioDeepONet;
    throw InvalidInput("unknown network kind: " + s);
}

struct NetworkSpec {
    NetworkKind kind = NetworkKind::Mlp;
    MlpSpec mlp;              // used when kind == Mlp
    MlpSpec branch, branch2;  // branch2 only for mio-deeponet
    MlpSpec trunk;
    int latent_p = 0;         // DeepONet inner-product width
    bool output_bias = true;

    void validate() const {
        if (kind == NetworkKind::DeepONet || kind == NetworkKind::MioDeepONet) {
            if (branch.out != latent_p || trunk.out != latent_p)
                throw ShapeError("deeponet: branch/trunk output width must equal latent_p");
            if (kind == NetworkKind::MioDeepONet && branch2.out != latent_p)
                throw ShapeError("mio-deeponet: second branch output width must equal latent_p");
        }
    }
};

// Named slice of the flat parameter array.
struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t len = 0;
};

struct ParamLayout {
    std::vector<Slice> slices;

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& s : slices) n += s.len;
        return n;
    }

    const Slice& find(const std::string& name) const {
        for (const auto& s : slices)
            if (s.name == name) return s;
        throw InvalidInput("layout: no slice named " + name);
    }

    bool has(const std::string& name) const {
        for (const auto& s : slices)
            if (s.name == name) return true;
        return false;
    }
};

// Flat 64-bit parameter array with a layout descriptor. Parameter order per
// layer: weights (row-major, out x in) then biases.
struct ParamVector {
    std::vector<double> data;
    ParamLayout layout;
};

// Builds the layout of one MLP under a slice-name prefix.
inline void append_mlp_layout(ParamLayout& layout, const MlpSpec& spec, const std::string& prefix,
                              std::size_t& offset) {
    auto w = spec.widths();
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        std::size_t nw = static_cast<std::size_t>(w[l]) * w[l + 1];
        std::size_t nb = static_cast<std::size_t>(w[l + 1]);
        layout.slices.push_back({prefix + ".w" + std::to_string(l), offset, nw});
        offset += nw;
        layout.slices.push_back({prefix + ".b" + std::to_string(l), offset, nb});
        offset += nb;
    }
}

inline ParamLayout make_layout(const NetworkSpec& spec) {
    spec.validate();
    ParamLayout layout;
    std::size_t offset = 0;
    switch (spec.kind) {
        case NetworkKind::Mlp:
            append_mlp_layout(layout, spec.mlp, "mlp", offset);
            break;
        case NetworkKind::DeepONet:
            append_mlp_layout(layout, spec.branch, "branch", offset);
            append_mlp_layout(layout, spec.trunk, "trunk", offset);
            break;
        case NetworkKind::MioDeepONet:
            append_mlp_layout(layout, spec.branch, "branch1", offset);
            append_mlp_layout(layout, spec.branch2, "branch2", offset);
            append_mlp_layout(layout, spec.trunk, "trunk", offset);
            break;
    }
    if (spec.kind != NetworkKind::Mlp && spec.output_bias) {
        layout.slices.push_back({"output_bias", offset, 1});
        offset += 1;
    }
    return layout;
}

// Symmetric uniform initialization scaled by 1/sqrt(fan_in), seeded.
ParamVector init_params(const NetworkSpec& spec, Rng& rng);

}  // namespace niuq::nn
