#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace tfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Product of all entries of `dims` (1 for an empty list).
std::size_t dims_product(std::span<const std::size_t> dims);

/// Dense D-way array of doubles.
///
/// Storage is generalized column-major: index i_1 varies fastest and i_D
/// slowest, so element (i_1, ..., i_D) lives at
/// sum_d i_d * prod_{m<d} p_m (0-based). `data()` is therefore vec(X).
class DenseTensor {
public:
    DenseTensor() = default;
    /// Zero-filled tensor. Every dimension must be positive.
    explicit DenseTensor(Dims dims);
    DenseTensor(Dims dims, std::vector<double> data);

    static DenseTensor from_matrix(const Matrix& m);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t order() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double& operator[](std::size_t linear) noexcept { return data_[linear]; }
    double operator[](std::size_t linear) const noexcept { return data_[linear]; }

    double& at(std::span<const std::size_t> index);
    double at(std::span<const std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index) { return at(std::span(index.begin(), index.size())); }
    double at(std::initializer_list<std::size_t> index) const { return at(std::span(index.begin(), index.size())); }

    std::size_t offset(std::span<const std::size_t> index) const;

    Eigen::Map<const Vector> as_vector() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
    Eigen::Map<Vector> as_vector() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double s);

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Dims dims_;
    std::vector<double> data_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);

/// Ordered sample of T tensors sharing one shape.
class TensorSeries {
public:
    TensorSeries() = default;
    explicit TensorSeries(Dims shape);
    explicit TensorSeries(std::vector<DenseTensor> items);

    void push_back(DenseTensor x);

    const Dims& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t length() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    /// Number of entries in one observation.
    std::size_t tensor_size() const { return dims_product(shape_); }

    const DenseTensor& operator[](std::size_t t) const { return items_[t]; }
    DenseTensor& operator[](std::size_t t) { return items_[t]; }
    const std::vector<DenseTensor>& items() const noexcept { return items_; }

    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }

private:
    Dims shape_;
    std::vector<DenseTensor> items_;
};

/// Mode-d matricization (0-based d): a p_d x p_{-d} matrix whose column index
/// enumerates the remaining modes with the lowest mode varying fastest.
Matrix unfold(const DenseTensor& x, std::size_t mode);

/// Inverse of `unfold` for the given tensor shape.
DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims);

/// d-mode product X x_d A. Replaces p_d by A.rows().
DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Matrix& a);

/// Same as `mode_product(x, mode, a.transpose())` without forming the transpose.
DenseTensor mode_product_transposed(const DenseTensor& x, std::size_t mode, const Matrix& a);

struct ModeOperand {
    std::size_t mode;
    std::reference_wrapper<const Matrix> matrix;
    bool transposed = false;
};

/// Applies a chain of mode products on distinct modes. Operands that shrink the
/// tensor are applied first; the result does not depend on the order.
DenseTensor multi_mode_product(const DenseTensor& x, std::span<const ModeOperand> operands);

/// X^(d) Y^(d)^T for two tensors of equal dims, without forming either unfolding.
Matrix unfold_product(const DenseTensor& x, const DenseTensor& y, std::size_t mode);

Vector vectorize(const DenseTensor& x);

Matrix kronecker(const Matrix& a, const Matrix& b);

/// Kronecker chain mats[n-1] (x) ... (x) mats[0], the ordering that matches
/// vec() of a multi-mode product.
Matrix kronecker_reversed(std::span<const Matrix> mats);

double frobenius_norm(const DenseTensor& x);
double frobenius_norm(const Matrix& m);

}  // namespace tfm
