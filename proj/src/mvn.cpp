#include "niuq/bayes/mvn.hpp"

#include <cmath>

#include "niuq/errors.hpp"

namespace niuq::bayes {

void check_cholesky(const Eigen::MatrixXd& chol) {
    if (chol.rows() != chol.cols()) throw InvalidCholesky("cholesky factor must be square");
    for (Eigen::Index i = 0; i < chol.rows(); ++i)
        if (!(chol(i, i) > 0.0)) throw InvalidCholesky("cholesky diagonal must be positive");
}

double mvn_logpdf(std::span<const double> x, std::span<const double> mean,
                  const Eigen::MatrixXd& chol) {
    check_cholesky(chol);
    const Eigen::Index d = chol.rows();
    if (static_cast<Eigen::Index>(x.size()) != d || x.size() != mean.size())
        throw ShapeError("mvn_logpdf: dimension mismatch");
    Eigen::VectorXd r(d);
    for (Eigen::Index i = 0; i < d; ++i) r(i) = x[i] - mean[i];
    Eigen::VectorXd w = chol.triangularView<Eigen::Lower>().solve(r);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) logdet += std::log(chol(i, i));
    return -0.5 * w.squaredNorm() - logdet -
           0.5 * static_cast<double>(d) * 1.8378770664093454836;  // log 2 pi
}

ad::Var mvn_logpdf_var(std::span<const ad::Var> x, std::span<const double> mean,
                       const Eigen::MatrixXd& chol) {
    check_cholesky(chol);
    const Eigen::Index d = chol.rows();
    if (static_cast<Eigen::Index>(x.size()) != d || x.size() != mean.size())
        throw ShapeError("mvn_logpdf_var: dimension mismatch");
    ad::Tape& tape = *x[0].tape;
    // forward substitution of L w = x - mean with tape scalars
    std::vector<ad::Var> w;
    w.reserve(d);
    ad::Var quad = tape.zero();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        ad::Var s = x[i] - mean[i];
        for (Eigen::Index j = 0; j < i; ++j)
            if (chol(i, j) != 0.0) s = s - w[j] * chol(i, j);
        ad::Var wi = s * (1.0 / chol(i, i));
        w.push_back(wi);
        quad = quad + square(wi);
        logdet += std::log(chol(i, i));
    }
    return -0.5 * quad - (logdet + 0.5 * static_cast<double>(d) * 1.8378770664093454836);
}

}  // namespace niuq::bayes
