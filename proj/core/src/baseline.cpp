#include "tfm/baseline.hpp"

#include "tfm/errors.hpp"
#include "tfm/spectral.hpp"

#include <cmath>

namespace tfm {

namespace {

void check_lags(const TensorSeries& series, std::size_t lags) {
    if (series.empty()) throw DimensionError("auto-covariance baseline: empty tensor series");
    if (lags < 1) throw DimensionError("auto-covariance baseline: lags must be at least 1");
    if (lags >= series.length())
        throw DimensionError("auto-covariance baseline: lags=" + std::to_string(lags) + " needs T > lags, T=" +
                             std::to_string(series.length()));
}

// sum_h W(h) W(h)^T with W(h) = scale_h * sum_t X_t^(d) X_{t+h}^(d)^T, scale_h = 1/((T-h) p).
Matrix lag_matrix(const TensorSeries& series, std::size_t mode, std::size_t lags) {
    const auto p = static_cast<Eigen::Index>(series.shape()[mode]);
    const std::size_t T = series.length();
    const double size = static_cast<double>(series.tensor_size());
    Matrix out = Matrix::Zero(p, p);
    for (std::size_t h = 1; h <= lags; ++h) {
        Matrix w = Matrix::Zero(p, p);
        for (std::size_t t = 0; t + h < T; ++t) w += unfold_product(series[t], series[t + h], mode);
        w /= static_cast<double>(T - h) * size;
        out.noalias() += w * w.transpose();
    }
    return 0.5 * (out + out.transpose());
}

TensorSeries centered_copy(const TensorSeries& series, bool center, std::optional<DenseTensor>* mean) {
    if (!center) return series;
    DenseTensor m = temporal_mean(series);
    TensorSeries out = subtract_mean(series, m);
    if (mean) *mean = std::move(m);
    return out;
}

Matrix scaled_top(const Matrix& m, std::size_t k, Vector* eigvals) {
    EigenSystem es = symmetric_eigensystem(m);
    if (eigvals) *eigvals = es.values.cwiseMax(0.0);
    return std::sqrt(static_cast<double>(m.rows())) * es.vectors.leftCols(static_cast<Eigen::Index>(k));
}

// Lag matrix of the series projected on every mode but `mode`.
Matrix projected_lag_matrix(const TensorSeries& series, const LoadingSet& loadings, std::size_t mode,
                            std::size_t lags) {
    std::vector<ModeOperand> ops;
    for (std::size_t d = 0; d < loadings.order(); ++d)
        if (d != mode) ops.push_back({d, std::cref(loadings[d]), true});
    const double complement =
        static_cast<double>(series.tensor_size()) / static_cast<double>(series.shape()[mode]);
    Dims shape = loadings.ranks();
    shape[mode] = series.shape()[mode];
    TensorSeries projected(shape);
    for (const auto& x : series) projected.push_back((1.0 / complement) * multi_mode_product(x, ops));
    return lag_matrix(projected, mode, lags);
}

}  // namespace

Matrix tipup_mode_matrix(const TensorSeries& series, std::size_t mode, std::size_t lags) {
    check_lags(series, lags);
    if (mode >= series.order()) throw DimensionError("mode " + std::to_string(mode + 1) + " out of range");
    return lag_matrix(series, mode, lags);
}

Dims estimate_ranks_tipup(const TensorSeries& series, std::size_t k_max, std::size_t lags, bool center) {
    check_lags(series, lags);
    const TensorSeries work = centered_copy(series, center, nullptr);
    Dims out;
    for (std::size_t d = 0; d < series.order(); ++d)
        out.push_back(ratio_rank(symmetric_eigensystem(lag_matrix(work, d, lags)).values, k_max));
    return out;
}

LoadingSet tipup_loadings(const TensorSeries& series, const Dims& ranks, std::size_t lags) {
    check_lags(series, lags);
    check_ranks(series.shape(), ranks);
    LoadingSet out;
    for (std::size_t d = 0; d < series.order(); ++d)
        out.mats.push_back(scaled_top(lag_matrix(series, d, lags), ranks[d], nullptr));
    return out;
}

FactorFit itipup_fit(const TensorSeries& series, const Dims& ranks, const BaselineConfig& config) {
    check_lags(series, config.lags);
    check_ranks(series.shape(), ranks);
    if (!(config.iteration.tol > 0.0)) throw DimensionError("iteration tolerance must be positive");
    if (config.iteration.max_iter < 1) throw DimensionError("max_iter must be at least 1");

    FactorFit fit;
    fit.method = Method::ITipup;
    const TensorSeries work = centered_copy(series, config.center, &fit.mean);

    LoadingSet current = tipup_loadings(work, ranks, config.lags);
    fit.eigvals.assign(work.order(), Vector());
    fit.converged = false;
    for (std::size_t sweep = 1; sweep <= config.iteration.max_iter; ++sweep) {
        const LoadingSet previous = current;
        for (std::size_t d = 0; d < work.order(); ++d) {
            const LoadingSet& projector = config.iteration.update_within_sweep ? current : previous;
            current[d] = scaled_top(projected_lag_matrix(work, projector, d, config.lags), ranks[d], &fit.eigvals[d]);
        }
        const double change = loading_change(current, previous, config.iteration.norm);
        fit.per_sweep_distance.push_back(change);
        fit.iterations = sweep;
        if (change <= config.iteration.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.loadings = std::move(current);
    fit.factors = extract_factors(work, fit.loadings);
    fit.signals = reconstruct_signals(fit.factors, fit.loadings);
    return fit;
}

}  // namespace tfm
