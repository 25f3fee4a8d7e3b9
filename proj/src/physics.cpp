#include "niuq/pde/physics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "niuq/nn/checkpoint.hpp"

namespace niuq::pde {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double PoissonTruth::u(double x) const {
    const double c = std::cos(kTwoPi * x);
    return c * c * c;
}

double PoissonTruth::u_xx(double x) const {
    const double a = kTwoPi;
    const double c = std::cos(a * x);
    const double s = std::sin(a * x);
    return 6.0 * a * a * c * s * s - 3.0 * a * a * c * c * c;
}

double PoissonTruth::f(double x) const {
    const double uv = u(x);
    return kappa * u_xx(x) - lambda * uv * uv * uv;
}

Eigen::MatrixXd grf_kernel(const GrfSpec& spec) {
    const std::size_t n = spec.grid.size();
    Eigen::MatrixXd k(n, n);
    const double inv = 1.0 / (2.0 * spec.correlation_length * spec.correlation_length);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = spec.grid[i] - spec.grid[j];
            k(i, j) = std::exp(-d * d * inv);
        }
    return k;
}

Eigen::MatrixXd grf_cholesky(const GrfSpec& spec) {
    Eigen::MatrixXd k = grf_kernel(spec);
    k.diagonal().array() += spec.jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success)
        throw CholeskyFailure("grf kernel Cholesky failed; raise the jitter");
    return llt.matrixL();
}

std::vector<double> grf_sample(const GrfSpec& spec, std::uint64_t seed) {
    const std::size_t n = spec.grid.size();
    // Sample in sorted-coordinate order so the draw is invariant to grid ordering.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spec.grid[a] < spec.grid[b]; });
    GrfSpec sorted = spec;
    for (std::size_t i = 0; i < n; ++i) sorted.grid[i] = spec.grid[order[i]];
    Eigen::MatrixXd L = grf_cholesky(sorted);
    Rng rng(seed);
    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = rng.normal();
    Eigen::VectorXd y = L * z;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[order[i]] = y(i);
    return out;
}

std::vector<std::vector<double>> imex_solve(const std::vector<double>& face_coeff, double h,
                                            double kappa,
                                            const std::function<double(double, double)>& source,
                                            std::size_t n_nodes, double dt, double t_end,
                                            std::size_t t_stride) {
    if (face_coeff.size() != n_nodes - 1) throw ShapeError("imex_solve: face coefficient count");
    const std::size_t m = n_nodes - 2;  // interior unknowns, Dirichlet u = 0 at both ends
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const double r = dt / (2.0 * h * h);

    // tridiagonal (I - dt/2 A) for interior nodes 1..n-2
    std::vector<double> sub(m), diag(m), sup(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double al = face_coeff[i];      // face between node i and i+1 (grid indices)
        const double ar = face_coeff[i + 1];
        sub[i] = -r * al;
        diag[i] = 1.0 + r * (al + ar);
        sup[i] = -r * ar;
    }
    // Thomas prefactor
    std::vector<double> cp(m);
    cp[0] = sup[0] / diag[0];
    std::vector<double> denom(m);
    denom[0] = diag[0];
    for (std::size_t i = 1; i < m; ++i) {
        denom[i] = diag[i] - sub[i] * cp[i - 1];
        cp[i] = sup[i] / denom[i];
    }

    auto laplacian = [&](const std::vector<double>& u, std::size_t i) {
        // interior index i -> grid index i+1
        const double al = face_coeff[i];
        const double ar = face_coeff[i + 1];
        return (ar * (u[i + 2] - u[i + 1]) - al * (u[i + 1] - u[i])) / (h * h);
    };

    std::vector<double> u(n_nodes, 0.0), unew(n_nodes, 0.0);
    std::vector<double> react(m, 0.0), react_prev(m, 0.0), rhs(m), dp(m);
    std::vector<std::vector<double>> frames;
    frames.push_back(u);

    for (std::size_t s2 = 0; s2 < steps; ++s2) {
        const double t = static_cast<double>(s2) * dt;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = static_cast<double>(i + 1) * h;
            react[i] = kappa * u[i + 1] * u[i + 1] + source(x, t);
        }
        for (std::size_t i = 0; i < m; ++i) {
            // CN diffusion + AB2-extrapolated reaction/source (Euler on step 0)
            const double rx = s2 == 0 ? react[i] : 1.5 * react[i] - 0.5 * react_prev[i];
            rhs[i] = u[i + 1] + 0.5 * dt * laplacian(u, i) + dt * rx;
        }
        // Thomas solve
        dp[0] = rhs[0] / denom[0];
        for (std::size_t i = 1; i < m; ++i) dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom[i];
        for (std::size_t i = m - 1; i-- > 0;) dp[i] -= cp[i] * dp[i + 1];
        unew[0] = 0.0;
        unew[n_nodes - 1] = 0.0;
        for (std::size_t i = 0; i < m; ++i) unew[i + 1] = dp[i];
        std::swap(u, unew);
        react_prev = react;
        double umax = 0.0;
        for (double v : u) umax = std::max(umax, std::abs(v));
        if (umax > 1e6) throw SolverDiverged("imex_solve: solution magnitude exceeded 1e6");
        if ((s2 + 1) % t_stride == 0) frames.push_back(u);
    }
    return frames;
}

std::vector<double> rd_solve_constant(const std::vector<double>& f, double diffusion, double kappa,
                                      double dt) {
    const std::size_t n = f.size();
    if (n < 3) throw ShapeError("rd_solve_constant: grid too small");
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> face(n - 1, diffusion);
    auto source = [&](double x, double) {
        const double idx = x / h;
        return f[static_cast<std::size_t>(std::llround(idx))];
    };
    auto frames = imex_solve(face, h, kappa, source, n, dt,
                             1.0, static_cast<std::size_t>(std::llround(1.0 / dt)));
    return frames.back();
}

std::vector<std::vector<double>> rd_solve_hetero(const std::vector<double>& k,
                                                 const std::vector<double>& f, double kappa,
                                                 double dt, std::size_t t_stride) {
    const std::size_t n = f.size();
    if (k.size() != n) throw ShapeError("rd_solve_hetero: k and f must share the grid");
    if (n < 3) throw ShapeError("rd_solve_hetero: grid too small");
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> node_coeff(n), face(n - 1);
    for (std::size_t i = 0; i < n; ++i) node_coeff[i] = 0.01 * (std::abs(k[i]) + 1.0);
    for (std::size_t i = 0; i + 1 < n; ++i) face[i] = 0.5 * (node_coeff[i] + node_coeff[i + 1]);
    auto source = [&](double x, double) {
        const double idx = x / h;
        return f[static_cast<std::size_t>(std::llround(idx))];
    };
    return imex_solve(face, h, kappa, source, n, dt, 1.0, t_stride);
}

NoisyDataset make_noisy(const std::vector<double>& clean_x, const std::vector<double>& clean_y,
                        double sigma_x, double sigma_y, std::uint64_t seed) {
    if (sigma_x < 0.0 || sigma_y < 0.0) throw InvalidInput("make_noisy: negative noise scale");
    NoisyDataset d;
    d.seed = seed;
    d.inputs.clean = clean_x;
    d.inputs.sigma = sigma_x;
    d.outputs.clean = clean_y;
    d.outputs.sigma = sigma_y;
    Rng rx = Rng::stream(seed, 0);
    Rng ry = Rng::stream(seed, 1);
    d.inputs.noisy = clean_x;
    if (sigma_x > 0.0)
        for (auto& v : d.inputs.noisy) v += sigma_x * rx.normal();
    d.outputs.noisy = clean_y;
    if (sigma_y > 0.0)
        for (auto& v : d.outputs.noisy) v += sigma_y * ry.normal();
    return d;
}

std::vector<double> uniform_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

std::pair<OperatorCorpus, OperatorCorpus> build_operator_corpus(CorpusProblem problem,
                                                                std::size_t n_train,
                                                                std::size_t n_test,
                                                                std::uint64_t seed,
                                                                std::size_t grid_n) {
    GrfSpec grf;
    grf.correlation_length = 0.2;
    grf.grid = uniform_grid(grid_n);

    auto make = [&](std::size_t count, std::size_t index_base) {
        OperatorCorpus c;
        c.problem = problem;
        c.grid = grf.grid;
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint64_t s = seed * 1000003ull + index_base + i;
            try {
                if (problem == CorpusProblem::RdConstant) {
                    auto f = grf_sample(grf, s);
                    c.inputs.push_back(f);
                    c.solutions.push_back(rd_solve_constant(f));
                } else {
                    auto k = grf_sample(grf, 2 * s);
                    auto f = grf_sample(grf, 2 * s + 1);
                    auto frames = rd_solve_hetero(k, f);
                    std::vector<double> flat;
                    flat.reserve(frames.size() * grid_n);
                    for (const auto& fr : frames) flat.insert(flat.end(), fr.begin(), fr.end());
                    c.inputs.push_back(k);
                    c.inputs2.push_back(f);
                    c.solutions.push_back(std::move(flat));
                }
            } catch (const SolverDiverged& e) {
                throw SolverDiverged(std::string(e.what()) + " (corpus sample " +
                                     std::to_string(index_base + i) + ")");
            }
            c.sample_seeds.push_back(s);
        }
        return c;
    };
    return {make(n_train, 0), make(n_test, n_train)};
}

namespace {

nlohmann::json encode_matrix(const std::vector<std::vector<double>>& rows) {
    std::string blob;
    std::size_t cols = rows.empty() ? 0 : rows[0].size();
    blob.reserve(rows.size() * cols * 16);
    for (const auto& row : rows)
        for (double v : row) blob += nn::double_to_hex(v);
    return {{"rows", rows.size()}, {"cols", cols}, {"data_hex", blob}};
}

std::vector<std::vector<double>> decode_matrix(const nlohmann::json& j) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    const std::string& blob = j.at("data_hex").get_ref<const std::string&>();
    if (blob.size() != rows * cols * 16) throw IoError("corpus: corrupt matrix blob");
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out[r][c] = nn::hex_to_double(blob.substr((r * cols + c) * 16, 16));
    return out;
}

}  // namespace

void save_corpus(const OperatorCorpus& corpus, const std::string& path) {
    nlohmann::json j;
    j["format"] = "niuq-corpus-v1";
    j["problem"] = corpus.problem == CorpusProblem::RdConstant ? "rd_constant" : "rd_hetero";
    j["grid"] = corpus.grid;
    j["inputs"] = encode_matrix(corpus.inputs);
    j["inputs2"] = encode_matrix(corpus.inputs2);
    j["solutions"] = encode_matrix(corpus.solutions);
    j["sample_seeds"] = corpus.sample_seeds;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus: " + path);
    out << j.dump() << "\n";
}

OperatorCorpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read corpus: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "niuq-corpus-v1") throw IoError("unknown corpus format");
    OperatorCorpus c;
    c.problem = j.at("problem").get<std::string>() == "rd_constant" ? CorpusProblem::RdConstant
                                                                    : CorpusProblem::RdHetero;
    c.grid = j.at("grid").get<std::vector<double>>();
    c.inputs = decode_matrix(j.at("inputs"));
    c.inputs2 = decode_matrix(j.at("inputs2"));
    c.solutions = decode_matrix(j.at("solutions"));
    c.sample_seeds = j.at("sample_seeds").get<std::vector<std::uint64_t>>();
    return c;
}

}  // namespace niuq::pde
