#pragma once

// Lag auto-covariance comparator in the style of TIPUP / iTIPUP.
//
// The mode-d matrix aggregates lagged cross-products of the unfoldings,
//   W_d(h) = 1 / ((T - h) p) * sum_{t=1}^{T-h} X_t^(d) X_{t+h}^(d)^T,
//   M_d    = sum_{h=1}^{h0} W_d(h) W_d(h)^T,
// so it only sees signal that is serially correlated. The iterative variant
// projects the series on the other modes' current loadings before forming
// the lag products and sweeps exactly like ipmopca_fit.

#include "tfm/estimators.hpp"

namespace tfm {

struct BaselineConfig {
    /// h0; 1 gives the lag-1 comparator.
    std::size_t lags = 1;
    IterationOptions iteration;
    bool center = true;
};

Matrix tipup_mode_matrix(const TensorSeries& series, std::size_t mode, std::size_t lags);

/// Eigenvalue-ratio ranks taken from the lag matrices of the raw series.
Dims estimate_ranks_tipup(const TensorSeries& series, std::size_t k_max, std::size_t lags, bool center = true);

/// Non-iterated estimator: sqrt(p_d) times the top eigenvectors of each lag matrix.
LoadingSet tipup_loadings(const TensorSeries& series, const Dims& ranks, std::size_t lags);

FactorFit itipup_fit(const TensorSeries& series, const Dims& ranks, const BaselineConfig& config = {});

}  // namespace tfm
