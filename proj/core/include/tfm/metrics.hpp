#pragma once

#include "tfm/estimators.hpp"

namespace tfm {

/// ||P(a_hat) - P(a_true)||_2, a value in [0, 1].
double column_space_distance(const Matrix& a_hat, const Matrix& a_true);

/// sqrt( (1/(T p)) sum_t ||S_hat_t - S_t||_F^2 ).
double signal_rmse(const TensorSeries& s_hat, const TensorSeries& s_true);

/// Percentage of modes whose rank was recovered exactly.
double rank_accuracy(const Dims& k_hat, const Dims& k_true);

/// ||X_hat - X||_F / ||X||_F over all observations stacked.
double reconstruction_error(const TensorSeries& series, const TensorSeries& fitted);

struct EvalReport {
    std::vector<double> distances;
    double rmse = 0.0;
    Dims k_hat;
    Dims k_true;
    double accuracy = 0.0;
    double reconstruction = 0.0;
    double seconds = 0.0;
};

}  // namespace tfm
