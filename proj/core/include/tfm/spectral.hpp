#pragma once

#include "tfm/tensor.hpp"

namespace tfm {

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Column j of `vectors` belongs to `values[j]`. Each eigenvector is signed so
/// that its largest-magnitude entry is positive (lowest index wins ties).
struct EigenSystem {
    Vector values;
    Matrix vectors;
};

/// Full spectrum of (S + S^T)/2 with the ordering and sign conventions above.
EigenSystem symmetric_eigensystem(const Matrix& s);

/// The k leading eigenpairs of (S + S^T)/2.
EigenSystem top_k_eigensystem(const Matrix& s, std::size_t k);

/// The k leading left singular vectors of M, same sign convention.
Matrix thin_left_singular(const Matrix& m, std::size_t k);

/// Orthogonal projector A (A^T A)^{-1} A^T onto col(A). Throws NumericError if
/// the smallest singular value of A is below 1e-10 times the largest.
Matrix projection_matrix(const Matrix& a);

/// Projector for a loading matrix with A^T A = p I: returns A A^T / p, and
/// falls back to `projection_matrix` when that normalization does not hold.
Matrix loading_projection(const Matrix& a);

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
double symmetric_spectral_norm(const Matrix& s);

/// Flips columns so each column's largest-magnitude entry is positive.
void apply_sign_convention(Matrix& vectors);

}  // namespace tfm
