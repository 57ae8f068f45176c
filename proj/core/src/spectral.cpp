#include "tfm/spectral.hpp"

#include "tfm/errors.hpp"

#include <cmath>
#include <string>

namespace tfm {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

}  // namespace

void apply_sign_convention(Matrix& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
    }
}

EigenSystem symmetric_eigensystem(const Matrix& s) {
    if (s.rows() != s.cols())
        throw DimensionError("eigensystem of a non-square " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                             " matrix");
    require_finite(s, "eigensystem");
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");

    // Eigen returns ascending order; reverse into descending.
    const Eigen::Index n = sym.rows();
    EigenSystem out{Vector(n), Matrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j) = solver.eigenvalues()(n - 1 - j);
        out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
    }
    apply_sign_convention(out.vectors);
    return out;
}

EigenSystem top_k_eigensystem(const Matrix& s, std::size_t k) {
    if (k == 0 || k > static_cast<std::size_t>(s.rows()))
        throw DimensionError("top_k_eigensystem: k=" + std::to_string(k) + " outside [1, " + std::to_string(s.rows()) +
                             "]");
    EigenSystem full = symmetric_eigensystem(s);
    const auto kk = static_cast<Eigen::Index>(k);
    return {full.values.head(kk), full.vectors.leftCols(kk)};
}

Matrix thin_left_singular(const Matrix& m, std::size_t k) {
    const auto limit = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
    if (k == 0 || k > limit)
        throw DimensionError("thin_left_singular: k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) +
                             "]");
    require_finite(m, "thin_left_singular");
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    Matrix u = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
    apply_sign_convention(u);
    return u;
}

Matrix projection_matrix(const Matrix& a) {
    if (a.cols() == 0 || a.rows() < a.cols())
        throw NumericError("projection_matrix: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                           " matrix cannot have full column rank");
    require_finite(a, "projection_matrix");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-10 * sv(0))) throw NumericError("projection_matrix: rank-deficient input");
    const Matrix& u = svd.matrixU();
    return u * u.transpose();
}

Matrix loading_projection(const Matrix& a) {
    const double p = static_cast<double>(a.rows());
    const Matrix gram = a.transpose() * a / p;
    if ((gram - Matrix::Identity(a.cols(), a.cols())).norm() <= 1e-8) return a * a.transpose() / p;
    return projection_matrix(a);
}

double symmetric_spectral_norm(const Matrix& s) {
    if (s.size() == 0) return 0.0;
    require_finite(s, "spectral norm");
    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace tfm
