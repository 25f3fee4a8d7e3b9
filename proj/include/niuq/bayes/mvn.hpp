#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "niuq/ad/tape.hpp"

namespace niuq::bayes {

// Validates a Cholesky factor: lower-triangular storage with positive diagonal.
void check_cholesky(const Eigen::MatrixXd& chol);

// log N(x | mean, L L^T) via triangular solve.
double mvn_logpdf(std::span<const double> x, std::span<const double> mean,
                  const Eigen::MatrixXd& chol);

// Same density with x as tape scalars (mean and factor are constants).
ad::Var mvn_logpdf_var(std::span<const ad::Var> x, std::span<const double> mean,
                       const Eigen::MatrixXd& chol);

// Scalar Gaussian log-density helpers.
inline double normal_logpdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.91893853320467274178;  // log sqrt(2 pi)
}

inline ad::Var normal_logpdf(ad::Var x, double mean, double sigma) {
    ad::Var z = (x - mean) * (1.0 / sigma);
    return -0.5 * square(z) - (std::log(sigma) + 0.91893853320467274178);
}

inline ad::Var normal_logpdf_residual(ad::Var residual, double sigma) {
    return -0.5 / (sigma * sigma) * square(residual) -
           (std::log(sigma) + 0.91893853320467274178);
}

// Heteroscedastic case: both residual and variance live on the tape.
inline ad::Var normal_logpdf_residual_var(ad::Var residual, ad::Var variance) {
    ad::Tape& tape = *residual.tape;
    return -0.5 * (square(residual) / variance) - 0.5 * log(variance) -
           tape.constant(0.91893853320467274178);
}

}  // namespace niuq::bayes
