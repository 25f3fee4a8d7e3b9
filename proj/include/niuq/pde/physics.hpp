#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "niuq/errors.hpp"
#include "niuq/rng.hpp"

namespace niuq::pde {

// ---------------------------------------------------------------- Poisson

// Manufactured truth for kappa u'' - lambda u^3 = f with u = cos^3(2 pi x).
struct PoissonTruth {
    double kappa = 0.01;
    double lambda = 0.1;

    double u(double x) const;
    double u_xx(double x) const;
    double f(double x) const;
};

// -------------------------------------------------------------------- GRF

struct GrfSpec {
    double correlation_length = 0.2;
    std::vector<double> grid;
    double jitter = 1e-10;
};

// Squared-exponential kernel matrix on the grid (no jitter).
Eigen::MatrixXd grf_kernel(const GrfSpec& spec);

// Cholesky factor of kernel + jitter I. Throws CholeskyFailure.
Eigen::MatrixXd grf_cholesky(const GrfSpec& spec);

// Mean-zero sample L z with seeded i.i.d. standard normal z. Sampling is
// performed in sorted-coordinate order and mapped back, so permuting the
// grid permutes the sample.
std::vector<double> grf_sample(const GrfSpec& spec, std::uint64_t seed);

// ------------------------------------------------------- reaction-diffusion

// u_t = D u_xx + kappa u^2 + f(x) on [0,1], zero initial/boundary data.
// Crank-Nicolson diffusion, second-order explicit reaction/source, dt = 1e-3.
// Returns u(., t=1) on the input grid (uniform, endpoints included).
std::vector<double> rd_solve_constant(const std::vector<double>& f, double diffusion = 0.01,
                                      double kappa = 0.01, double dt = 1e-3);

// u_t = d/dx(0.01 (|k| + 1) u_x) + kappa u^2 + f(x), conservative face
// coefficients. Returns the full space-time field: frames at t = 0, t_stride*dt,
// ..., 1 (101 frames for the defaults), each on the input grid.
std::vector<std::vector<double>> rd_solve_hetero(const std::vector<double>& k,
                                                 const std::vector<double>& f, double kappa = 0.01,
                                                 double dt = 1e-3, std::size_t t_stride = 10);

// Shared IMEX core with a time-dependent source, used by the manufactured-
// solution tests. face_coeff has grid.size()-1 entries.
std::vector<std::vector<double>> imex_solve(const std::vector<double>& face_coeff, double h,
                                            double kappa,
                                            const std::function<double(double, double)>& source,
                                            std::size_t n_nodes, double dt, double t_end,
                                            std::size_t t_stride);

// ----------------------------------------------------------------- datasets

struct NoisyChannel {
    std::vector<double> clean;
    std::vector<double> noisy;
    double sigma = 0.0;
};

// Paired observed inputs/outputs with their clean references and the seed
// that generated the noise draws.
struct NoisyDataset {
    NoisyChannel inputs;
    NoisyChannel outputs;
    std::uint64_t seed = 0;
};

NoisyDataset make_noisy(const std::vector<double>& clean_x, const std::vector<double>& clean_y,
                        double sigma_x, double sigma_y, std::uint64_t seed);

// ------------------------------------------------------------------ corpus

enum class CorpusProblem { RdConstant, RdHetero };

struct OperatorCorpus {
    CorpusProblem problem = CorpusProblem::RdConstant;
    std::vector<double> grid;
    std::vector<std::vector<double>> inputs;   // GRF input function per sample (f, or k)
    std::vector<std::vector<double>> inputs2;  // second input (f) for rd_hetero
    std::vector<std::vector<double>> solutions;  // flattened target field per sample
    std::vector<std::uint64_t> sample_seeds;
};

// Samples input functions from the l = 0.2 GRF on the 100-point grid, solves
// each, and splits train/test deterministically.
std::pair<OperatorCorpus, OperatorCorpus> build_operator_corpus(CorpusProblem problem,
                                                                std::size_t n_train,
                                                                std::size_t n_test,
                                                                std::uint64_t seed,
                                                                std::size_t grid_n = 100);

void save_corpus(const OperatorCorpus& corpus, const std::string& path);
OperatorCorpus load_corpus(const std::string& path);

// Standard 100-point uniform sensor grid on [0, 1].
std::vector<double> uniform_grid(std::size_t n = 100);

}  // namespace niuq::pde
