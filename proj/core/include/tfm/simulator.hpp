#pragma once

#include "tfm/estimators.hpp"
#include "tfm/rng.hpp"

#include <cstdint>
#include <span>

namespace tfm {

/// Tucker factor model X_t = F_t x_1 A_1 ... x_D A_D + E_t with AR(1) cores
/// F_t = phi F_{t-1} + sqrt(1 - phi^2) V_t and AR(1) array-normal noise
/// E_t = psi E_{t-1} + sqrt(1 - psi^2) U_t, vec(U_t) ~ N(0, Delta_D (x) ... (x) Delta_1).
struct SimConfig {
    std::size_t T = 20;
    Dims dims{20, 20, 20};
    Dims ranks{2, 3, 4};
    double phi = 0.0;
    double psi = 0.0;
    std::uint64_t seed = 1;
    std::size_t replications = 1;

    void validate() const;
};

/// The four (phi, psi) regimes: 1 uncorrelated, 2 correlated factors,
/// 3 correlated noise, 4 both correlated.
struct Scenario {
    double phi;
    double psi;
};
Scenario scenario(int id);

/// Size ids 1..5: (T, p) = (20, 20), (50, 20), (50, 50), (100, 50), (100, 100),
/// every mode of size p, ranks (2, 3, 4).
SimConfig standard_config(int scenario_id, int size_id, std::uint64_t seed = 1);

struct SimTruth {
    LoadingSet loadings;
    TensorSeries cores;
    TensorSeries signals;
    double phi = 0.0;
    double psi = 0.0;
    std::uint64_t seed = 0;
    std::size_t replication = 0;
};

struct SimDataset {
    TensorSeries series;
    SimTruth truth;
};

/// sqrt(p) times the first k left singular vectors of a p x k standard-normal draw.
Matrix generate_loadings(std::size_t p, std::size_t k, Rng& rng);

/// T cores of dims `ranks`, started from the stationary law.
TensorSeries simulate_core_path(std::size_t T, const Dims& ranks, double phi, Rng& rng);

/// Delta_p: unit diagonal, 1/p off the diagonal.
Matrix noise_mode_covariance(std::size_t p);

/// Lower Cholesky factor of Delta_{p_d} for every mode.
std::vector<Matrix> noise_cholesky_factors(const Dims& dims);

TensorSeries simulate_noise_path(std::size_t T, const Dims& dims, double psi, Rng& rng);
TensorSeries simulate_noise_path(std::size_t T, std::span<const Matrix> cholesky, double psi, Rng& rng);

/// Replication r draws from its own stream Rng(config.seed, r).
SimDataset simulate_dataset(const SimConfig& config, std::size_t replication = 0);

}  // namespace tfm
