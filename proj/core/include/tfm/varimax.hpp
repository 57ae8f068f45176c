#pragma once

#include "tfm/tensor.hpp"

namespace tfm {

struct VarimaxResult {
    Matrix rotated;   ///< loadings * rotation
    Matrix rotation;  ///< orthogonal k x k
    std::size_t sweeps = 0;
};

/// Raw varimax by pairwise Jacobi plane rotations. Stops once a full sweep
/// over all column pairs rotates by less than `tol` radians.
VarimaxResult varimax(const Matrix& loadings, double tol = 1e-10, std::size_t max_sweeps = 500);

/// sum_j [ (1/p) sum_i a_ij^4 - ((1/p) sum_i a_ij^2)^2 ]
double varimax_criterion(const Matrix& loadings);

}  // namespace tfm
