#include "tfm/varimax.hpp"

#include "tfm/errors.hpp"

#include <cmath>

namespace tfm {

double varimax_criterion(const Matrix& loadings) {
    const double p = static_cast<double>(loadings.rows());
    const Matrix sq = loadings.array().square().matrix();
    double total = 0.0;
    for (Eigen::Index j = 0; j < sq.cols(); ++j) {
        const double mean_sq = sq.col(j).sum() / p;
        total += sq.col(j).squaredNorm() / p - mean_sq * mean_sq;
    }
    return total;
}

VarimaxResult varimax(const Matrix& loadings, double tol, std::size_t max_sweeps) {
    if (loadings.cols() < 1) throw DimensionError("varimax needs at least one column");
    if (!loadings.allFinite()) throw NumericError("varimax: non-finite loadings");

    const Eigen::Index k = loadings.cols();
    const double p = static_cast<double>(loadings.rows());
    VarimaxResult out{loadings, Matrix::Identity(k, k), 0};
    if (k == 1) return out;

    Matrix& a = out.rotated;
    Matrix& q = out.rotation;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double largest = 0.0;
        for (Eigen::Index i = 0; i < k - 1; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j) {
                // Kaiser's closed-form angle for the (i, j) plane.
                const Eigen::ArrayXd x = a.col(i).array();
                const Eigen::ArrayXd y = a.col(j).array();
                const Eigen::ArrayXd u = x.square() - y.square();
                const Eigen::ArrayXd v = 2.0 * x * y;
                const double su = u.sum();
                const double sv = v.sum();
                const double num = 2.0 * (u * v).sum() - 2.0 * su * sv / p;
                const double den = (u.square() - v.square()).sum() - (su * su - sv * sv) / p;
                const double phi = 0.25 * std::atan2(num, den);
                if (std::abs(phi) < tol) continue;
                largest = std::max(largest, std::abs(phi));
                const double c = std::cos(phi);
                const double s = std::sin(phi);
                const Eigen::VectorXd ai = a.col(i);
                a.col(i) = c * ai + s * a.col(j);
                a.col(j) = -s * ai + c * a.col(j);
                const Eigen::VectorXd qi = q.col(i);
                q.col(i) = c * qi + s * q.col(j);
                q.col(j) = -s * qi + c * q.col(j);
            }
        out.sweeps = sweep + 1;
        if (largest < tol) break;
    }
    return out;
}

}  // namespace tfm
