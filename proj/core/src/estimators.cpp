#include "tfm/estimators.hpp"

#include "tfm/baseline.hpp"
#include "tfm/errors.hpp"
#include "tfm/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace tfm {

namespace {

void require_nonempty(const TensorSeries& series, const char* what) {
    if (series.empty()) throw DimensionError(std::string(what) + ": empty tensor series");
}

void check_loadings(const TensorSeries& series, const LoadingSet& loadings) {
    if (loadings.order() != series.order())
        throw DimensionError("loading set has " + std::to_string(loadings.order()) + " modes, series has " +
                             std::to_string(series.order()));
    for (std::size_t d = 0; d < loadings.order(); ++d) {
        if (static_cast<std::size_t>(loadings[d].rows()) != series.shape()[d])
            throw DimensionError("loading matrix for mode " + std::to_string(d + 1) + " has " +
                                 std::to_string(loadings[d].rows()) + " rows, mode size is " +
                                 std::to_string(series.shape()[d]));
        if (loadings[d].cols() == 0) throw DimensionError("loading matrix with no columns");
    }
}

std::vector<ModeOperand> operands_for(const LoadingSet& loadings, bool transposed,
                                      std::size_t skip = std::numeric_limits<std::size_t>::max()) {
    std::vector<ModeOperand> ops;
    ops.reserve(loadings.order());
    for (std::size_t d = 0; d < loadings.order(); ++d)
        if (d != skip) ops.push_back({d, std::cref(loadings[d]), transposed});
    return ops;
}

// Loading estimate sqrt(p_d) * eig(M, k) together with the full spectrum,
// negatives from round-off clipped to zero.
struct ModeEstimate {
    Matrix loading;
    Vector eigvals;
};

ModeEstimate estimate_from(const Matrix& cov, std::size_t k) {
    EigenSystem es = symmetric_eigensystem(cov);
    const double scale = std::sqrt(static_cast<double>(cov.rows()));
    return {scale * es.vectors.leftCols(static_cast<Eigen::Index>(k)), es.values.cwiseMax(0.0)};
}

struct Workspace {
    TensorSeries data;
    std::optional<DenseTensor> mean;
};

Workspace prepare(const TensorSeries& series, bool center) {
    if (!center) return {series, std::nullopt};
    DenseTensor mean = temporal_mean(series);
    return {subtract_mean(series, mean), std::move(mean)};
}

LoadingSet mopca_loadings(const TensorSeries& work, const Dims& ranks, std::vector<Vector>* eigvals) {
    LoadingSet out;
    for (std::size_t d = 0; d < work.order(); ++d) {
        ModeEstimate est = estimate_from(mode_covariance(work, d), ranks[d]);
        out.mats.push_back(std::move(est.loading));
        if (eigvals) eigvals->push_back(std::move(est.eigvals));
    }
    return out;
}

void finish(FactorFit& fit, const TensorSeries& work, bool compute_signals) {
    fit.factors = extract_factors(work, fit.loadings);
    if (compute_signals) fit.signals = reconstruct_signals(fit.factors, fit.loadings);
}

// Shared sweep loop behind PmoPCA and IPmoPCA.
void iterate(FactorFit& fit, const TensorSeries& work, const Dims& ranks, LoadingSet start,
             const IterationOptions& options) {
    LoadingSet current = std::move(start);
    fit.eigvals.assign(work.order(), Vector());
    fit.converged = false;
    fit.iterations = 0;
    fit.per_sweep_distance.clear();
    for (std::size_t sweep = 1; sweep <= options.max_iter; ++sweep) {
        const LoadingSet previous = current;
        for (std::size_t d = 0; d < work.order(); ++d) {
            const LoadingSet& projector = options.update_within_sweep ? current : previous;
            ModeEstimate est = estimate_from(projected_mode_covariance(work, projector, d), ranks[d]);
            current[d] = std::move(est.loading);
            fit.eigvals[d] = std::move(est.eigvals);
        }
        const double change = loading_change(current, previous, options.norm);
        fit.per_sweep_distance.push_back(change);
        fit.iterations = sweep;
        if (change <= options.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.loadings = std::move(current);
}

void check_iteration(const IterationOptions& options) {
    if (!(options.tol > 0.0)) throw DimensionError("iteration tolerance must be positive");
    if (options.max_iter < 1) throw DimensionError("max_iter must be at least 1");
}

}  // namespace

Dims LoadingSet::dims() const {
    Dims out;
    for (const auto& m : mats) out.push_back(static_cast<std::size_t>(m.rows()));
    return out;
}

Dims LoadingSet::ranks() const {
    Dims out;
    for (const auto& m : mats) out.push_back(static_cast<std::size_t>(m.cols()));
    return out;
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::MoPCA: return "mopca";
        case Method::PmoPCA: return "pmopca";
        case Method::IPmoPCA: return "ipmopca";
        case Method::ITipup: return "itipup";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (Method m : {Method::MoPCA, Method::PmoPCA, Method::IPmoPCA, Method::ITipup})
        if (lower == method_name(m)) return m;
    return std::nullopt;
}

void check_ranks(const Dims& shape, const Dims& ranks) {
    if (ranks.size() != shape.size())
        throw DimensionError("expected " + std::to_string(shape.size()) + " ranks, got " + std::to_string(ranks.size()));
    for (std::size_t d = 0; d < shape.size(); ++d)
        if (ranks[d] < 1 || ranks[d] > shape[d])
            throw DimensionError("rank " + std::to_string(ranks[d]) + " for mode " + std::to_string(d + 1) +
                                 " outside [1, " + std::to_string(shape[d]) + "]");
}

void EstimatorConfig::validate(const Dims& shape) const {
    check_iteration(iteration);
    if (ranks) check_ranks(shape, *ranks);
    if (lags < 1) throw DimensionError("lags must be at least 1");
}

DenseTensor temporal_mean(const TensorSeries& series) {
    require_nonempty(series, "temporal_mean");
    DenseTensor mean(series.shape());
    for (const auto& x : series) mean += x;
    mean *= 1.0 / static_cast<double>(series.length());
    return mean;
}

TensorSeries subtract_mean(const TensorSeries& series, const DenseTensor& mean) {
    TensorSeries out(series.shape());
    for (const auto& x : series) out.push_back(x - mean);
    return out;
}

Matrix mode_covariance(const TensorSeries& series, std::size_t mode) {
    require_nonempty(series, "mode_covariance");
    if (mode >= series.order()) throw DimensionError("mode " + std::to_string(mode + 1) + " out of range");
    const auto p = static_cast<Eigen::Index>(series.shape()[mode]);
    Matrix m = Matrix::Zero(p, p);
    for (const auto& x : series) m += unfold_product(x, x, mode);
    m /= static_cast<double>(series.length()) * static_cast<double>(series.tensor_size());
    return 0.5 * (m + m.transpose());
}

namespace {

// X_t x_{m != d} A_m^T; mode d is left untouched.
DenseTensor project_except(const DenseTensor& x, const LoadingSet& loadings, std::size_t mode) {
    const auto ops = operands_for(loadings, true, mode);
    return multi_mode_product(x, ops);
}

double complement_size(const Dims& shape, std::size_t mode) {
    return static_cast<double>(dims_product(shape)) / static_cast<double>(shape[mode]);
}

}  // namespace

std::vector<Matrix> projected_series(const TensorSeries& series, const LoadingSet& loadings, std::size_t mode) {
    check_loadings(series, loadings);
    if (mode >= series.order()) throw DimensionError("mode " + std::to_string(mode + 1) + " out of range");
    const double scale = 1.0 / complement_size(series.shape(), mode);
    std::vector<Matrix> out;
    out.reserve(series.length());
    for (const auto& x : series) out.push_back(scale * unfold(project_except(x, loadings, mode), mode));
    return out;
}

Matrix projected_mode_covariance(const TensorSeries& series, const LoadingSet& loadings, std::size_t mode) {
    require_nonempty(series, "projected_mode_covariance");
    check_loadings(series, loadings);
    if (mode >= series.order()) throw DimensionError("mode " + std::to_string(mode + 1) + " out of range");
    const auto p = static_cast<Eigen::Index>(series.shape()[mode]);
    Matrix m = Matrix::Zero(p, p);
    for (const auto& x : series) {
        const DenseTensor z = project_except(x, loadings, mode);
        m += unfold_product(z, z, mode);
    }
    const double pc = complement_size(series.shape(), mode);
    m /= pc * pc * static_cast<double>(series.length()) * static_cast<double>(p);
    return 0.5 * (m + m.transpose());
}

TensorSeries extract_factors(const TensorSeries& series, const LoadingSet& loadings, bool center) {
    require_nonempty(series, "extract_factors");
    check_loadings(series, loadings);
    const TensorSeries* source = &series;
    TensorSeries centered;
    if (center) {
        centered = subtract_mean(series, temporal_mean(series));
        source = &centered;
    }
    const auto ops = operands_for(loadings, true);
    const double scale = 1.0 / static_cast<double>(series.tensor_size());
    TensorSeries out(loadings.ranks());
    for (const auto& x : *source) out.push_back(scale * multi_mode_product(x, ops));
    return out;
}

TensorSeries reconstruct_signals(const TensorSeries& factors, const LoadingSet& loadings) {
    require_nonempty(factors, "reconstruct_signals");
    if (factors.shape() != loadings.ranks()) throw DimensionError("core dims do not match loading ranks");
    const auto ops = operands_for(loadings, false);
    TensorSeries out(loadings.dims());
    for (const auto& f : factors) out.push_back(multi_mode_product(f, ops));
    return out;
}

TensorSeries project_signals(const TensorSeries& series, const LoadingSet& loadings) {
    require_nonempty(series, "project_signals");
    check_loadings(series, loadings);
    LoadingSet projectors;
    for (const auto& a : loadings.mats) projectors.mats.push_back(a * a.transpose() / static_cast<double>(a.rows()));
    const auto ops = operands_for(projectors, false);
    TensorSeries out(series.shape());
    for (const auto& x : series) out.push_back(multi_mode_product(x, ops));
    return out;
}

TensorSeries fitted_observations(const FactorFit& fit) {
    if (!fit.signals) throw DimensionError("fit carries no signals");
    if (!fit.mean) return *fit.signals;
    TensorSeries out(fit.signals->shape());
    for (const auto& s : *fit.signals) out.push_back(s + *fit.mean);
    return out;
}

FactorFit mopca_fit(const TensorSeries& series, const Dims& ranks, bool center) {
    require_nonempty(series, "mopca_fit");
    check_ranks(series.shape(), ranks);
    Workspace ws = prepare(series, center);
    FactorFit fit;
    fit.method = Method::MoPCA;
    fit.loadings = mopca_loadings(ws.data, ranks, &fit.eigvals);
    fit.mean = std::move(ws.mean);
    finish(fit, ws.data, true);
    return fit;
}

FactorFit pmopca_fit(const TensorSeries& series, const Dims& ranks, bool center, const std::optional<LoadingSet>& init) {
    require_nonempty(series, "pmopca_fit");
    check_ranks(series.shape(), ranks);
    Workspace ws = prepare(series, center);
    LoadingSet start = init ? *init : mopca_loadings(ws.data, ranks, nullptr);
    check_loadings(ws.data, start);
    FactorFit fit;
    fit.method = Method::PmoPCA;
    IterationOptions once;
    once.tol = std::numeric_limits<double>::infinity();
    once.max_iter = 1;
    once.update_within_sweep = false;
    iterate(fit, ws.data, ranks, std::move(start), once);
    fit.mean = std::move(ws.mean);
    finish(fit, ws.data, true);
    return fit;
}

FactorFit ipmopca_fit(const TensorSeries& series, const Dims& ranks, const IterationOptions& options, bool center,
                      const std::optional<LoadingSet>& init) {
    require_nonempty(series, "ipmopca_fit");
    check_ranks(series.shape(), ranks);
    check_iteration(options);
    Workspace ws = prepare(series, center);
    LoadingSet start = init ? *init : mopca_loadings(ws.data, ranks, nullptr);
    check_loadings(ws.data, start);
    FactorFit fit;
    fit.method = Method::IPmoPCA;
    iterate(fit, ws.data, ranks, std::move(start), options);
    fit.mean = std::move(ws.mean);
    finish(fit, ws.data, true);
    return fit;
}

double loading_change(const LoadingSet& a, const LoadingSet& b, StoppingNorm norm) {
    if (a.order() != b.order()) throw DimensionError("loading_change: different mode counts");
    double worst = 0.0;
    for (std::size_t d = 0; d < a.order(); ++d) {
        if (a[d].rows() != b[d].rows()) throw DimensionError("loading_change: different mode sizes");
        const Matrix diff = loading_projection(a[d]) - loading_projection(b[d]);
        const double v = norm == StoppingNorm::Spectral ? symmetric_spectral_norm(diff) : diff.norm();
        worst = std::max(worst, v);
    }
    return worst;
}

std::size_t ratio_rank(const Vector& eigvals, std::size_t k_max) {
    if (k_max < 1 || k_max + 1 > static_cast<std::size_t>(eigvals.size()))
        throw DimensionError("k_max=" + std::to_string(k_max) + " needs 1 <= k_max <= " +
                             std::to_string(eigvals.size() > 0 ? eigvals.size() - 1 : 0));
    const double top = eigvals(0);
    if (!(top > 0.0)) throw NumericError("ratio rank: all eigenvalues are zero");
    const double floor = kRatioFloor * top;
    std::size_t best = 1;
    double best_ratio = -1.0;
    for (std::size_t j = 1; j <= k_max; ++j) {
        const double num = eigvals(static_cast<Eigen::Index>(j - 1));
        const double den = std::max(eigvals(static_cast<Eigen::Index>(j)), floor);
        const double ratio = num / den;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = j;
        }
    }
    return best;
}

std::size_t default_k_max(const Dims& shape) {
    if (shape.empty()) return 0;
    const std::size_t smallest = *std::min_element(shape.begin(), shape.end());
    return std::min<std::size_t>(8, smallest - 1);
}

namespace {

void check_k_max(const Dims& shape, std::size_t k_max) {
    for (std::size_t d = 0; d < shape.size(); ++d)
        if (k_max < 1 || k_max + 1 > shape[d])
            throw DimensionError("k_max=" + std::to_string(k_max) + " must lie in [1, " +
                                 std::to_string(shape[d] - 1) + "] for mode " + std::to_string(d + 1));
}

}  // namespace

Dims estimate_ranks(const TensorSeries& series, std::size_t k_max, bool center) {
    require_nonempty(series, "estimate_ranks");
    check_k_max(series.shape(), k_max);
    Workspace ws = prepare(series, center);
    Dims out;
    for (std::size_t d = 0; d < series.order(); ++d)
        out.push_back(ratio_rank(symmetric_eigensystem(mode_covariance(ws.data, d)).values, k_max));
    return out;
}

Dims estimate_ranks_projected(const TensorSeries& series, const LoadingSet& loadings, std::size_t k_max, bool center) {
    require_nonempty(series, "estimate_ranks_projected");
    check_k_max(series.shape(), k_max);
    Workspace ws = prepare(series, center);
    Dims out;
    for (std::size_t d = 0; d < series.order(); ++d)
        out.push_back(ratio_rank(symmetric_eigensystem(projected_mode_covariance(ws.data, loadings, d)).values, k_max));
    return out;
}

FactorFit fit(const TensorSeries& series, const EstimatorConfig& config) {
    require_nonempty(series, "fit");
    config.validate(series.shape());
    Dims ranks;
    if (config.ranks) {
        ranks = *config.ranks;
    } else {
        const std::size_t k_max = config.k_max ? config.k_max : default_k_max(series.shape());
        ranks = config.method == Method::ITipup ? estimate_ranks_tipup(series, k_max, config.lags, config.center)
                                                : estimate_ranks(series, k_max, config.center);
    }
    FactorFit out;
    switch (config.method) {
        case Method::MoPCA: out = mopca_fit(series, ranks, config.center); break;
        case Method::PmoPCA: out = pmopca_fit(series, ranks, config.center); break;
        case Method::IPmoPCA: out = ipmopca_fit(series, ranks, config.iteration, config.center); break;
        case Method::ITipup: {
            BaselineConfig bc;
            bc.lags = config.lags;
            bc.iteration = config.iteration;
            bc.center = config.center;
            out = itipup_fit(series, ranks, bc);
            break;
        }
    }
    if (!config.compute_signals) out.signals.reset();
    return out;
}

}  // namespace tfm
