#include "niuq/nn/mlp.hpp"

#include <cmath>

namespace niuq::nn {

namespace {

double activate(Activation a, double x) {
    return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0);
}

double activate_grad(Activation a, double pre, double post) {
    return a == Activation::Tanh ? 1.0 - post * post : (pre > 0.0 ? 1.0 : 0.0);
}

void check_shapes(const MlpSpec& spec, std::size_t n_params, std::size_t n_in) {
    if (n_in != static_cast<std::size_t>(spec.in))
        throw ShapeError("mlp_forward: input width mismatch");
    if (n_params != spec.param_count())
        throw ShapeError("mlp_forward: parameter count mismatch");
}

}  // namespace

ParamVector init_params(const NetworkSpec& spec, Rng& rng) {
    ParamVector p;
    p.layout = make_layout(spec);
    p.data.assign(p.layout.total(), 0.0);
    auto init_mlp = [&](const MlpSpec& m, const std::string& prefix) {
        auto w = m.widths();
        for (std::size_t l = 0; l + 1 < w.size(); ++l) {
            const Slice& ws = p.layout.find(prefix + ".w" + std::to_string(l));
            const double scale = 1.0 / std::sqrt(static_cast<double>(w[l]));
            for (std::size_t i = 0; i < ws.len; ++i)
                p.data[ws.offset + i] = rng.uniform(-scale, scale);
            // biases stay zero
        }
    };
    switch (spec.kind) {
        case NetworkKind::Mlp:
            init_mlp(spec.mlp, "mlp");
            break;
        case NetworkKind::DeepONet:
            init_mlp(spec.branch, "branch");
            init_mlp(spec.trunk, "trunk");
            break;
        case NetworkKind::MioDeepONet:
            init_mlp(spec.branch, "branch1");
            init_mlp(spec.branch2, "branch2");
            init_mlp(spec.trunk, "trunk");
            break;
    }
    return p;
}

std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> x) {
    check_shapes(spec, params.size(), x.size());
    auto widths = spec.widths();
    std::vector<double> cur(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const double* w = params.data() + off;
        const double* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
        std::vector<double> next(nout);
        for (int o = 0; o < nout; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) s += row[i] * cur[i];
            next[o] = (l + 2 < widths.size()) ? activate(spec.act, s) : s;
        }
        cur = std::move(next);
        off += static_cast<std::size_t>(nin) * nout + nout;
    }
    return cur;
}

std::vector<double> mlp_forward_cached(const MlpSpec& spec, std::span<const double> params,
                                       std::span<const double> x, MlpCache& cache) {
    check_shapes(spec, params.size(), x.size());
    auto widths = spec.widths();
    cache.pre.clear();
    cache.act.clear();
    cache.act.emplace_back(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const double* w = params.data() + off;
        const double* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
        const auto& cur = cache.act.back();
        std::vector<double> pre(nout), post(nout);
        for (int o = 0; o < nout; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) s += row[i] * cur[i];
            pre[o] = s;
            post[o] = (l + 2 < widths.size()) ? activate(spec.act, s) : s;
        }
        cache.pre.push_back(std::move(pre));
        cache.act.push_back(std::move(post));
        off += static_cast<std::size_t>(nin) * nout + nout;
    }
    return cache.act.back();
}

std::vector<double> mlp_backward(const MlpSpec& spec, std::span<const double> params,
                                 const MlpCache& cache, std::span<const double> dout,
                                 std::span<double> grad) {
    auto widths = spec.widths();
    const std::size_t n_layers = widths.size() - 1;
    std::vector<double> delta(dout.begin(), dout.end());
    // layer offsets
    std::vector<std::size_t> offs(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offs[l] = off;
        off += static_cast<std::size_t>(widths[l]) * widths[l + 1] + widths[l + 1];
    }
    for (std::size_t l = n_layers; l-- > 0;) {
        const int nin = widths[l], nout = widths[l + 1];
        const double* w = params.data() + offs[l];
        double* gw = grad.data() + offs[l];
        double* gb = gw + static_cast<std::size_t>(nin) * nout;
        const auto& in = cache.act[l];
        if (l + 1 < n_layers) {
            for (int o = 0; o < nout; ++o)
                delta[o] *= activate_grad(spec.act, cache.pre[l][o], cache.act[l + 1][o]);
        }
        std::vector<double> din(nin, 0.0);
        for (int o = 0; o < nout; ++o) {
            const double d = delta[o];
            double* grow = gw + static_cast<std::size_t>(o) * nin;
            const double* wrow = w + static_cast<std::size_t>(o) * nin;
            gb[o] += d;
            for (int i = 0; i < nin; ++i) {
                grow[i] += d * in[i];
                din[i] += d * wrow[i];
            }
        }
        delta = std::move(din);
    }
    return delta;
}

std::vector<ad::Var> mlp_var_forward(const MlpSpec& spec, std::span<const ad::Var> params,
                                     std::span<const ad::Var> x) {
    check_shapes(spec, params.size(), x.size());
    auto widths = spec.widths();
    std::vector<ad::Var> cur(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const ad::Var* w = params.data() + off;
        const ad::Var* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
        std::vector<ad::Var> next;
        next.reserve(nout);
        for (int o = 0; o < nout; ++o) {
            ad::Var s = b[o];
            for (int i = 0; i < nin; ++i)
                s = s.tape->fma(w[static_cast<std::size_t>(o) * nin + i], cur[i], s);
            if (l + 2 < widths.size())
                s = spec.act == Activation::Tanh ? tanh(s) : relu(s);
            next.push_back(s);
        }
        cur = std::move(next);
        off += static_cast<std::size_t>(nin) * nout + nout;
    }
    return cur;
}

ad::Jet3 mlp_jet_forward(const MlpSpec& spec, std::span<const ad::Var> params, const ad::Jet3& x) {
    if (spec.in != 1 || spec.out != 1)
        throw ShapeError("mlp_jet_forward: net must be scalar-input scalar-output");
    if (params.size() != spec.param_count())
        throw ShapeError("mlp_jet_forward: parameter count mismatch");
    auto widths = spec.widths();
    std::vector<ad::Jet3> cur{x};
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const ad::Var* w = params.data() + off;
        const ad::Var* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
        std::vector<ad::Jet3> next;
        next.reserve(nout);
        for (int o = 0; o < nout; ++o) {
            ad::Jet3 s = jet_shift(jet_scale(w[static_cast<std::size_t>(o) * nin], cur[0]), b[o]);
            for (int i = 1; i < nin; ++i)
                s = jet_fma(w[static_cast<std::size_t>(o) * nin + i], cur[i], s);
            if (l + 2 < widths.size())
                s = spec.act == Activation::Tanh ? jet_tanh(s) : jet_relu(s);
            next.push_back(s);
        }
        cur = std::move(next);
        off += static_cast<std::size_t>(nin) * nout + nout;
    }
    return cur[0];
}

ad::Jet3 mlp_jet_forward(ad::Tape& tape, const MlpSpec& spec, const ParamVector& params, double x) {
    if (params.data.size() != spec.param_count())
        throw ShapeError("mlp_jet_forward: layout mismatch");
    std::vector<ad::Var> leaves;
    leaves.reserve(params.data.size());
    for (double p : params.data) leaves.push_back(tape.leaf(p));
    return mlp_jet_forward(spec, leaves, ad::jet_lift_input(tape, x));
}

std::vector<std::vector<double>> dropout_predict(const MlpSpec& spec, std::span<const double> params,
                                                 std::span<const double> x, double rate,
                                                 std::size_t num_samples, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0) throw InvalidInput("dropout_predict: rate must be in [0, 1)");
    check_shapes(spec, params.size(), x.size());
    auto widths = spec.widths();
    Rng rng(seed);
    const double keep = 1.0 - rate;
    std::vector<std::vector<double>> out;
    out.reserve(num_samples);
    for (std::size_t s = 0; s < num_samples; ++s) {
        std::vector<double> cur(x.begin(), x.end());
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const int nin = widths[l], nout = widths[l + 1];
            const double* w = params.data() + off;
            const double* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
            std::vector<double> next(nout);
            for (int o = 0; o < nout; ++o) {
                double acc = b[o];
                const double* row = w + static_cast<std::size_t>(o) * nin;
                for (int i = 0; i < nin; ++i) acc += row[i] * cur[i];
                if (l + 2 < widths.size()) {
                    acc = activate(spec.act, acc);
                    // inverted dropout: kept units scaled by 1/keep
                    if (rate > 0.0) acc = rng.uniform() < rate ? 0.0 : acc / keep;
                }
                next[o] = acc;
            }
            cur = std::move(next);
            off += static_cast<std::size_t>(nin) * nout + nout;
        }
        out.push_back(std::move(cur));
    }
    return out;
}

std::vector<double> mlp_forward_dropout_cached(const MlpSpec& spec, std::span<const double> params,
                                               std::span<const double> x, double rate, Rng& rng,
                                               MlpCache& cache,
                                               std::vector<std::vector<double>>& masks) {
    if (rate < 0.0 || rate >= 1.0) throw InvalidInput("dropout: rate must be in [0, 1)");
    check_shapes(spec, params.size(), x.size());
    auto widths = spec.widths();
    const double keep = 1.0 - rate;
    cache.pre.clear();
    cache.act.clear();
    masks.clear();
    cache.act.emplace_back(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int nin = widths[l], nout = widths[l + 1];
        const double* w = params.data() + off;
        const double* b = params.data() + off + static_cast<std::size_t>(nin) * nout;
        const auto& cur = cache.act.back();
        std::vector<double> pre(nout), post(nout), mask;
        const bool hidden = l + 2 < widths.size();
        if (hidden) mask.resize(nout);
        for (int o = 0; o < nout; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * nin;
            for (int i = 0; i < nin; ++i) s += row[i] * cur[i];
            pre[o] = s;
            if (hidden) {
                double m = (rate > 0.0 && rng.uniform() < rate) ? 0.0 : 1.0 / keep;
                mask[o] = m;
                post[o] = activate(spec.act, s) * m;
            } else {
                post[o] = s;
            }
        }
        cache.pre.push_back(std::move(pre));
        cache.act.push_back(std::move(post));
        if (hidden) masks.push_back(std::move(mask));
        off += static_cast<std::size_t>(nin) * nout + nout;
    }
    return cache.act.back();
}

std::vector<double> mlp_backward_dropout(const MlpSpec& spec, std::span<const double> params,
                                         const MlpCache& cache,
                                         const std::vector<std::vector<double>>& masks,
                                         std::span<const double> dout, std::span<double> grad) {
    auto widths = spec.widths();
    const std::size_t n_layers = widths.size() - 1;
    std::vector<double> delta(dout.begin(), dout.end());
    std::vector<std::size_t> offs(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offs[l] = off;
        off += static_cast<std::size_t>(widths[l]) * widths[l + 1] + widths[l + 1];
    }
    for (std::size_t l = n_layers; l-- > 0;) {
        const int nin = widths[l], nout = widths[l + 1];
        const double* w = params.data() + offs[l];
        double* gw = grad.data() + offs[l];
        double* gb = gw + static_cast<std::size_t>(nin) * nout;
        const auto& in = cache.act[l];
        if (l + 1 < n_layers) {
            for (int o = 0; o < nout; ++o) {
                const double m = masks[l][o];
                const double pre = cache.pre[l][o];
                const double post_undropped = m != 0.0 ? cache.act[l + 1][o] / m : activate(spec.act, pre);
                delta[o] *= m * activate_grad(spec.act, pre, post_undropped);
            }
        }
        std::vector<double> din(nin, 0.0);
        for (int o = 0; o < nout; ++o) {
            const double d = delta[o];
            double* grow = gw + static_cast<std::size_t>(o) * nin;
            const double* wrow = w + static_cast<std::size_t>(o) * nin;
            gb[o] += d;
            for (int i = 0; i < nin; ++i) {
                grow[i] += d * in[i];
                din[i] += d * wrow[i];
            }
        }
        delta = std::move(din);
    }
    return delta;
}

}  // namespace niuq::nn
