#include "tfm/metrics.hpp"

#include "tfm/errors.hpp"
#include "tfm/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace tfm {

namespace {

void check_same(const TensorSeries& a, const TensorSeries& b, const char* what) {
    if (a.length() != b.length() || a.shape() != b.shape())
        throw DimensionError(std::string(what) + ": series differ in length or shape");
    if (a.empty()) throw DimensionError(std::string(what) + ": empty series");
}

}  // namespace

double column_space_distance(const Matrix& a_hat, const Matrix& a_true) {
    if (a_hat.rows() != a_true.rows())
        throw DimensionError("column_space_distance: row counts " + std::to_string(a_hat.rows()) + " and " +
                             std::to_string(a_true.rows()) + " differ");
    const Matrix diff = projection_matrix(a_hat) - projection_matrix(a_true);
    return std::clamp(symmetric_spectral_norm(diff), 0.0, 1.0);
}

double signal_rmse(const TensorSeries& s_hat, const TensorSeries& s_true) {
    check_same(s_hat, s_true, "signal_rmse");
    double sum = 0.0;
    for (std::size_t t = 0; t < s_hat.length(); ++t)
        sum += (s_hat[t].as_vector() - s_true[t].as_vector()).squaredNorm();
    return std::sqrt(sum / (static_cast<double>(s_hat.length()) * static_cast<double>(s_hat.tensor_size())));
}

double rank_accuracy(const Dims& k_hat, const Dims& k_true) {
    if (k_hat.size() != k_true.size() || k_true.empty())
        throw DimensionError("rank_accuracy: rank vectors of different lengths");
    std::size_t hits = 0;
    for (std::size_t d = 0; d < k_true.size(); ++d) hits += k_hat[d] == k_true[d];
    return 100.0 * static_cast<double>(hits) / static_cast<double>(k_true.size());
}

double reconstruction_error(const TensorSeries& series, const TensorSeries& fitted) {
    check_same(series, fitted, "reconstruction_error");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < series.length(); ++t) {
        num += (fitted[t].as_vector() - series[t].as_vector()).squaredNorm();
        den += series[t].as_vector().squaredNorm();
    }
    if (!(den > 0.0)) throw NumericError("reconstruction_error: data has zero norm");
    return std::sqrt(num / den);
}

}  // namespace tfm
