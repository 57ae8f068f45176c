#pragma once

#include "tfm/tensor.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfm {

/// Per-mode loading matrices; mats[d] is p_d x k_d.
///
/// Estimators return loadings with A_d^T A_d = p_d I (columns scaled by
/// sqrt(p_d)), so only the column space carries information.
struct LoadingSet {
    std::vector<Matrix> mats;

    std::size_t order() const noexcept { return mats.size(); }
    const Matrix& operator[](std::size_t d) const { return mats[d]; }
    Matrix& operator[](std::size_t d) { return mats[d]; }
    Dims dims() const;
    Dims ranks() const;
};

enum class Method { MoPCA, PmoPCA, IPmoPCA, ITipup };

std::string_view method_name(Method m);
/// Parses "mopca", "pmopca", "ipmopca", "itipup" (case-insensitive).
std::optional<Method> parse_method(std::string_view name);

/// Norm used for the projector-change stopping statistic.
enum class StoppingNorm { Spectral, Frobenius };

struct FactorFit {
    Method method = Method::MoPCA;
    LoadingSet loadings;
    /// One k_1 x ... x k_D core per observation.
    TensorSeries factors;
    /// Low-rank signals in the (possibly centered) estimation coordinates.
    std::optional<TensorSeries> signals;
    /// Temporal mean removed before estimation, if centering was on.
    std::optional<DenseTensor> mean;
    /// Descending eigenvalues of the final mode-d matrix, all p_d of them.
    std::vector<Vector> eigvals;
    std::size_t iterations = 0;
    bool converged = true;
    std::vector<double> per_sweep_distance;
};

struct IterationOptions {
    double tol = 1e-6;
    std::size_t max_iter = 50;
    /// true: modes already visited in the current sweep project with their
    /// fresh estimates. false: every mode projects with the previous sweep.
    bool update_within_sweep = true;
    StoppingNorm norm = StoppingNorm::Spectral;
};

struct EstimatorConfig {
    Method method = Method::IPmoPCA;
    /// Empty means select ranks with the eigenvalue-ratio rule.
    std::optional<Dims> ranks;
    /// 0 selects min(8, min_d p_d - 1).
    std::size_t k_max = 0;
    IterationOptions iteration;
    bool center = true;
    bool compute_signals = true;
    /// Lag count for the auto-covariance baseline.
    std::size_t lags = 1;

    void validate(const Dims& shape) const;
};

/// Throws DimensionError unless ranks has one entry per mode with 1 <= k_d <= p_d.
void check_ranks(const Dims& shape, const Dims& ranks);

DenseTensor temporal_mean(const TensorSeries& series);
TensorSeries subtract_mean(const TensorSeries& series, const DenseTensor& mean);

/// M_d = (1 / (T p)) sum_t X_t^(d) X_t^(d)^T.
Matrix mode_covariance(const TensorSeries& series, std::size_t mode);

/// Y_t = (1 / p_{-d}) X_t^(d) (A_D (x) ... (x) A_{d+1} (x) A_{d-1} (x) ... (x) A_1),
/// evaluated with mode products. loadings[mode] is ignored.
std::vector<Matrix> projected_series(const TensorSeries& series, const LoadingSet& loadings, std::size_t mode);

/// (1 / (T p_d)) sum_t Y_t Y_t^T for the projected matrices above.
Matrix projected_mode_covariance(const TensorSeries& series, const LoadingSet& loadings, std::size_t mode);

/// F_t = (1/p) X_t x_1 A_1^T ... x_D A_D^T, on mean-removed data when `center`.
TensorSeries extract_factors(const TensorSeries& series, const LoadingSet& loadings, bool center = false);

/// S_t = F_t x_1 A_1 ... x_D A_D.
TensorSeries reconstruct_signals(const TensorSeries& factors, const LoadingSet& loadings);

/// S_t = X_t x_1 P_1 ... x_D P_D with P_d = A_d A_d^T / p_d. Equals
/// reconstruct_signals(extract_factors(...)) for sqrt(p_d)-orthogonal loadings.
TensorSeries project_signals(const TensorSeries& series, const LoadingSet& loadings);

/// Signals plus the stored mean, i.e. the fit's reconstruction of the data.
TensorSeries fitted_observations(const FactorFit& fit);

FactorFit mopca_fit(const TensorSeries& series, const Dims& ranks, bool center = true);

/// One-shot projected refinement with frozen projection loadings (moPCA
/// when `init` is empty).
FactorFit pmopca_fit(const TensorSeries& series, const Dims& ranks, bool center = true,
                     const std::optional<LoadingSet>& init = std::nullopt);

/// Iterative projected refinement; starts from `init` or from moPCA.
/// Non-convergence is reported through `converged`, not thrown.
FactorFit ipmopca_fit(const TensorSeries& series, const Dims& ranks, const IterationOptions& options = {},
                      bool center = true, const std::optional<LoadingSet>& init = std::nullopt);

/// Projector-change statistic max_d ||P(a_d) - P(b_d)|| for two loading sets.
double loading_change(const LoadingSet& a, const LoadingSet& b, StoppingNorm norm = StoppingNorm::Spectral);

inline constexpr double kRatioFloor = 1e-12;

/// argmax_{1 <= j <= k_max} lambda_j / max(lambda_{j+1}, 1e-12 lambda_1),
/// smallest j on ties. `eigvals` must be descending with at least k_max + 1 entries.
std::size_t ratio_rank(const Vector& eigvals, std::size_t k_max);

std::size_t default_k_max(const Dims& shape);

/// Eigenvalue-ratio ranks from the mode-wise covariance matrices.
Dims estimate_ranks(const TensorSeries& series, std::size_t k_max, bool center = true);

/// Eigenvalue-ratio ranks from the covariance of series projected with `loadings`.
Dims estimate_ranks_projected(const TensorSeries& series, const LoadingSet& loadings, std::size_t k_max,
                              bool center = true);

/// Runs `config.method`, selecting ranks first when `config.ranks` is empty.
FactorFit fit(const TensorSeries& series, const EstimatorConfig& config);

}  // namespace tfm
