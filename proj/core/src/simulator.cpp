#include "tfm/simulator.hpp"

#include "tfm/errors.hpp"
#include "tfm/spectral.hpp"

#include <cmath>

namespace tfm {

namespace {

// Sub-stream ids inside one replication. Loadings do not depend on T.
constexpr std::uint64_t kLoadingStream = 0;
constexpr std::uint64_t kCoreStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

void check_ar(double coef, const char* name) {
    if (!(std::abs(coef) < 1.0)) throw DimensionError(std::string(name) + " must satisfy |" + name + "| < 1");
}

DenseTensor standard_normal(const Dims& dims, Rng& rng) {
    DenseTensor z(dims);
    for (auto& v : z.data()) v = rng.normal();
    return z;
}

}  // namespace

void SimConfig::validate() const {
    if (T < 1) throw DimensionError("simulation needs T >= 1");
    if (dims.empty()) throw DimensionError("simulation needs at least one mode");
    check_ranks(dims, ranks);
    check_ar(phi, "phi");
    check_ar(psi, "psi");
    if (replications < 1) throw DimensionError("replications must be at least 1");
}

Scenario scenario(int id) {
    switch (id) {
        case 1: return {0.0, 0.0};
        case 2: return {0.6, 0.0};
        case 3: return {0.0, 0.8};
        case 4: return {0.6, 0.8};
        default: throw DimensionError("scenario must be 1, 2, 3 or 4");
    }
}

SimConfig standard_config(int scenario_id, int size_id, std::uint64_t seed) {
    static constexpr std::size_t kT[] = {20, 50, 50, 100, 100};
    static constexpr std::size_t kP[] = {20, 20, 50, 50, 100};
    if (size_id < 1 || size_id > 5) throw DimensionError("size must be between 1 and 5");
    const Scenario sc = scenario(scenario_id);
    SimConfig c;
    c.T = kT[size_id - 1];
    const std::size_t p = kP[size_id - 1];
    c.dims = {p, p, p};
    c.ranks = {2, 3, 4};
    c.phi = sc.phi;
    c.psi = sc.psi;
    c.seed = seed;
    return c;
}

Matrix generate_loadings(std::size_t p, std::size_t k, Rng& rng) {
    if (k < 1 || k > p)
        throw DimensionError("generate_loadings: k=" + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
    Matrix g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    return std::sqrt(static_cast<double>(p)) * thin_left_singular(g, k);
}

TensorSeries simulate_core_path(std::size_t T, const Dims& ranks, double phi, Rng& rng) {
    check_ar(phi, "phi");
    const double innovation = std::sqrt(1.0 - phi * phi);
    TensorSeries out(ranks);
    DenseTensor f = standard_normal(ranks, rng);  // F_0 from the stationary law
    for (std::size_t t = 0; t < T; ++t) {
        DenseTensor v = standard_normal(ranks, rng);
        f = phi * std::move(f) + innovation * std::move(v);
        out.push_back(f);
    }
    return out;
}

Matrix noise_mode_covariance(std::size_t p) {
    if (p < 1) throw DimensionError("noise covariance needs p >= 1");
    const auto n = static_cast<Eigen::Index>(p);
    const double off = 1.0 / static_cast<double>(p);
    Matrix delta = Matrix::Constant(n, n, off);
    delta.diagonal().setOnes();
    return delta;
}

std::vector<Matrix> noise_cholesky_factors(const Dims& dims) {
    std::vector<Matrix> out;
    out.reserve(dims.size());
    for (auto p : dims) {
        Eigen::LLT<Matrix> llt(noise_mode_covariance(p));
        if (llt.info() != Eigen::Success) throw NumericError("noise covariance is not positive definite");
        out.push_back(llt.matrixL());
    }
    return out;
}

TensorSeries simulate_noise_path(std::size_t T, std::span<const Matrix> cholesky, double psi, Rng& rng) {
    check_ar(psi, "psi");
    Dims dims;
    std::vector<ModeOperand> ops;
    for (std::size_t d = 0; d < cholesky.size(); ++d) {
        dims.push_back(static_cast<std::size_t>(cholesky[d].rows()));
        ops.push_back({d, std::cref(cholesky[d]), false});
    }
    auto draw = [&] { return multi_mode_product(standard_normal(dims, rng), ops); };
    const double innovation = std::sqrt(1.0 - psi * psi);
    TensorSeries out(dims);
    DenseTensor e = draw();  // E_0 from the stationary law
    for (std::size_t t = 0; t < T; ++t) {
        e = psi * std::move(e) + innovation * draw();
        out.push_back(e);
    }
    return out;
}

TensorSeries simulate_noise_path(std::size_t T, const Dims& dims, double psi, Rng& rng) {
    const std::vector<Matrix> factors = noise_cholesky_factors(dims);
    return simulate_noise_path(T, factors, psi, rng);
}

SimDataset simulate_dataset(const SimConfig& config, std::size_t replication) {
    config.validate();
    const Rng stream(config.seed, replication);
    Rng loading_rng = stream.split(kLoadingStream);
    Rng core_rng = stream.split(kCoreStream);
    Rng noise_rng = stream.split(kNoiseStream);

    SimDataset out;
    SimTruth& truth = out.truth;
    truth.phi = config.phi;
    truth.psi = config.psi;
    truth.seed = config.seed;
    truth.replication = replication;
    for (std::size_t d = 0; d < config.dims.size(); ++d)
        truth.loadings.mats.push_back(generate_loadings(config.dims[d], config.ranks[d], loading_rng));
    truth.cores = simulate_core_path(config.T, config.ranks, config.phi, core_rng);
    truth.signals = reconstruct_signals(truth.cores, truth.loadings);

    const TensorSeries noise = simulate_noise_path(config.T, config.dims, config.psi, noise_rng);
    out.series = TensorSeries(config.dims);
    for (std::size_t t = 0; t < config.T; ++t) out.series.push_back(truth.signals[t] + noise[t]);
    return out;
}

}  // namespace tfm
