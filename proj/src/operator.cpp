#include "niuq/bayes/operator.hpp"

#include "niuq/bayes/mvn.hpp"

namespace niuq::bayes {

using ad::Tape;
using ad::Var;

void OperatorPosterior::validate() const {
    if (!model) throw InvalidInput("operator posterior: missing model");
    const std::size_t n = grid_size();
    auto check_meas = [&](const GridMeasurements& m) {
        if (m.indices.size() != m.values.size())
            throw ShapeError("operator posterior: measurement index/value mismatch");
        for (std::size_t i : m.indices)
            if (i >= n) throw IndexError("operator posterior: measurement index off the sensor grid");
    };
    check_meas(v_data);
    if (mio()) check_meas(w_data);
    if (v_prior.mean.size() != n) throw ShapeError("operator posterior: prior dimension mismatch");
    if (mio() && w_prior.mean.size() != n)
        throw ShapeError("operator posterior: second prior dimension mismatch");
}

std::vector<std::string> OperatorPosterior::param_names() const {
    std::vector<std::string> names;
    const char* first = mio() ? "z_k" : "z_v";
    for (std::size_t i = 0; i < grid_size(); ++i)
        names.push_back(std::string(first) + "[" + std::to_string(i) + "]");
    if (mio())
        for (std::size_t i = 0; i < grid_size(); ++i)
            names.push_back("z_f[" + std::to_string(i) + "]");
    return names;
}

std::vector<double> OperatorPosterior::initial_point() const {
    return std::vector<double>(dim(), 0.0);
}

std::vector<double> OperatorPosterior::fields_of(const std::vector<double>& q) const {
    const std::size_t n = grid_size();
    if (q.size() != dim()) throw ShapeError("operator posterior: parameter dimension mismatch");
    std::vector<double> out(q.size());
    auto unwhiten = [&](const FunctionPrior& prior, const double* z, double* v) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = prior.mean[i];
            for (std::size_t j = 0; j <= i; ++j) acc += prior.chol(i, j) * z[j];
            v[i] = acc;
        }
    };
    unwhiten(v_prior, q.data(), out.data());
    if (mio()) unwhiten(w_prior, q.data() + n, out.data() + n);
    return out;
}

double OperatorPosterior::logpost(const std::vector<double>& q, std::vector<double>* grad) const {
    validate();
    if (q.size() != dim()) throw ShapeError("operator posterior: parameter dimension mismatch");
    const std::size_t n = grid_size();

    thread_local Tape tape(1 << 20);
    tape.clear();
    std::vector<Var> leaves;
    leaves.reserve(q.size());
    for (double z : q) leaves.push_back(tape.leaf(z));

    // unwhiten on the tape: v = mean + L z
    auto unwhiten = [&](const FunctionPrior& prior, const Var* z) {
        std::vector<Var> field;
        field.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Var acc = tape.zero() + prior.mean[i];
            for (std::size_t j = 0; j <= i; ++j) {
                const double l = prior.chol(i, j);
                if (l != 0.0) acc = tape.fma_c(z[j], l, acc);
            }
            field.push_back(acc);
        }
        return field;
    };
    std::vector<Var> v_field = unwhiten(v_prior, leaves.data());
    std::vector<Var> w_field;
    if (mio()) w_field = unwhiten(w_prior, leaves.data() + n);
    std::span<const Var> v(v_field.data(), n);
    std::span<const Var> w(w_field.data(), w_field.size());

    Var lp = tape.zero();
    if (include_input_likelihood) {
        for (std::size_t i = 0; i < v_data.indices.size(); ++i)
            lp = lp + normal_logpdf_residual(v[v_data.indices[i]] - v_data.values[i], v_data.sigma);
        if (mio())
            for (std::size_t i = 0; i < w_data.indices.size(); ++i)
                lp = lp +
                     normal_logpdf_residual(w[w_data.indices[i]] - w_data.values[i], w_data.sigma);
    }
    if (include_u_likelihood) {
        for (std::size_t i = 0; i < u_data.coords.size(); ++i) {
            auto feat = nn::trunk_features(*model, u_data.coords[i]);
            Var g = mio() ? nn::mio_deeponet_forward_var(*model, v, w, feat)
                          : nn::deeponet_forward_var(*model, v, feat);
            lp = lp + normal_logpdf_residual(g - u_data.values[i], u_data.sigma);
        }
    }
    // standard normal prior on the whitened coordinates
    for (const Var& z : leaves) lp = lp - square(z) * 0.5 - 0.91893853320467274178;

    const double value = lp.val();
    if (grad) {
        tape.reverse(lp);
        grad->resize(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) (*grad)[i] = tape.adjoint(leaves[i]);
    }
    return value;
}

mcmc::LogDensity OperatorPosterior::density() const {
    return [this](const std::vector<double>& q, std::vector<double>& grad) {
        return logpost(q, &grad);
    };
}

double OperatorPosterior::predict_u(const std::vector<double>& q,
                                    const std::vector<double>& coord) const {
    const std::size_t n = grid_size();
    const std::vector<double> fields = fields_of(q);
    std::span<const double> v(fields.data(), n);
    if (mio()) {
        std::span<const double> w(fields.data() + n, n);
        return nn::mio_deeponet_forward(*model, v, w, coord);
    }
    return nn::deeponet_forward(*model, v, coord);
}

}  // namespace niuq::bayes
