#include "tfm/tensor.hpp"

#include "tfm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tfm {

namespace {

std::string dims_string(const Dims& dims) {
    std::string out = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(dims[i]);
    }
    return out + ")";
}

void check_mode(const DenseTensor& x, std::size_t mode) {
    if (mode >= x.order())
        throw DimensionError("mode " + std::to_string(mode + 1) + " out of range for a tensor of order " +
                             std::to_string(x.order()));
}

// Sizes of the index blocks before and after `mode` in storage order.
struct ModeSplit {
    std::size_t left;
    std::size_t extent;
    std::size_t right;
};

ModeSplit split_at(const Dims& dims, std::size_t mode) {
    ModeSplit s{1, dims[mode], 1};
    for (std::size_t m = 0; m < mode; ++m) s.left *= dims[m];
    for (std::size_t m = mode + 1; m < dims.size(); ++m) s.right *= dims[m];
    return s;
}

using ConstBlock = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;
using Block = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;

// Shared kernel for X x_d op(A). For every trailing index r the slab
// X[:, :, r] is a left x p_d column-major matrix; the product writes
// slab * op(A)^T into the matching left x q slab of the result.
template <bool Transposed>
DenseTensor mode_product_impl(const DenseTensor& x, std::size_t mode, const Matrix& a) {
    check_mode(x, mode);
    const std::size_t inner = Transposed ? static_cast<std::size_t>(a.rows()) : static_cast<std::size_t>(a.cols());
    const std::size_t outer = Transposed ? static_cast<std::size_t>(a.cols()) : static_cast<std::size_t>(a.rows());
    if (inner != x.dim(mode))
        throw DimensionError("mode product: matrix with " + std::to_string(inner) + " inner columns applied to mode " +
                             std::to_string(mode + 1) + " of size " + std::to_string(x.dim(mode)));
    if (outer == 0) throw DimensionError("mode product: matrix produces an empty mode");

    Dims out_dims = x.dims();
    out_dims[mode] = outer;
    DenseTensor out(out_dims);
    const ModeSplit s = split_at(x.dims(), mode);
    const auto left = static_cast<Eigen::Index>(s.left);
    const auto p = static_cast<Eigen::Index>(s.extent);
    const auto q = static_cast<Eigen::Index>(outer);

    if (s.left == 1) {
        // Mode-d fibers are contiguous columns: one GEMM over all of them.
        Eigen::Map<const Matrix> src(x.data().data(), p, static_cast<Eigen::Index>(s.right));
        Eigen::Map<Matrix> dst(out.data().data(), q, static_cast<Eigen::Index>(s.right));
        if constexpr (Transposed)
            dst.noalias() = a.transpose() * src;
        else
            dst.noalias() = a * src;
        return out;
    }
    for (std::size_t r = 0; r < s.right; ++r) {
        ConstBlock src(x.data().data() + r * s.left * s.extent, left, p, Eigen::OuterStride<>(left));
        Block dst(out.data().data() + r * s.left * outer, left, q, Eigen::OuterStride<>(left));
        if constexpr (Transposed)
            dst.noalias() = src * a;
        else
            dst.noalias() = src * a.transpose();
    }
    return out;
}

}  // namespace

std::size_t dims_product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw DimensionError("tensor needs at least one mode");
    for (auto p : dims_)
        if (p == 0) throw DimensionError("tensor dimensions must be positive, got " + dims_string(dims_));
    data_.assign(dims_product(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data) : DenseTensor(std::move(dims)) {
    if (data.size() != data_.size())
        throw DimensionError("tensor of dims " + dims_string(dims_) + " needs " + std::to_string(data_.size()) +
                             " values, got " + std::to_string(data.size()));
    data_ = std::move(data);
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    std::copy(m.data(), m.data() + m.size(), t.data_.begin());
    return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size())
        throw DimensionError("index of length " + std::to_string(index.size()) + " for a tensor of order " +
                             std::to_string(dims_.size()));
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (index[d] >= dims_[d]) throw DimensionError("tensor index out of range in mode " + std::to_string(d + 1));
        off += index[d] * stride;
        stride *= dims_[d];
    }
    return off;
}

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[offset(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return data_[offset(index)]; }

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (other.dims_ != dims_) throw DimensionError("tensor sum of mismatched dims");
    as_vector() += other.as_vector();
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (other.dims_ != dims_) throw DimensionError("tensor difference of mismatched dims");
    as_vector() -= other.as_vector();
    return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
    as_vector() *= s;
    return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

TensorSeries::TensorSeries(Dims shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw DimensionError("series shape needs at least one mode");
    for (auto p : shape_)
        if (p == 0) throw DimensionError("series dimensions must be positive");
}

TensorSeries::TensorSeries(std::vector<DenseTensor> items) {
    if (items.empty()) throw DimensionError("series needs at least one observation to infer its shape");
    shape_ = items.front().dims();
    items_.reserve(items.size());
    for (auto& x : items) push_back(std::move(x));
}

void TensorSeries::push_back(DenseTensor x) {
    if (x.dims() != shape_)
        throw DimensionError("observation dims " + dims_string(x.dims()) + " differ from series shape " +
                             dims_string(shape_));
    items_.push_back(std::move(x));
}

Matrix unfold(const DenseTensor& x, std::size_t mode) {
    check_mode(x, mode);
    const ModeSplit s = split_at(x.dims(), mode);
    Matrix m(static_cast<Eigen::Index>(s.extent), static_cast<Eigen::Index>(s.left * s.right));
    const double* src = x.data().data();
    // Column j = l + left * r, row i: source offset l + left * (i + p_d * r).
    for (std::size_t r = 0; r < s.right; ++r)
        for (std::size_t i = 0; i < s.extent; ++i) {
            const double* fiber = src + s.left * (i + s.extent * r);
            for (std::size_t l = 0; l < s.left; ++l)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l + s.left * r)) = fiber[l];
        }
    return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Dims& dims) {
    DenseTensor x(dims);
    check_mode(x, mode);
    const ModeSplit s = split_at(dims, mode);
    if (static_cast<std::size_t>(m.rows()) != s.extent || static_cast<std::size_t>(m.cols()) != s.left * s.right)
        throw DimensionError("fold: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " does not match mode " + std::to_string(mode + 1) + " of dims " + dims_string(dims));
    double* dst = x.data().data();
    for (std::size_t r = 0; r < s.right; ++r)
        for (std::size_t i = 0; i < s.extent; ++i) {
            double* fiber = dst + s.left * (i + s.extent * r);
            for (std::size_t l = 0; l < s.left; ++l)
                fiber[l] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l + s.left * r));
        }
    return x;
}

DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Matrix& a) {
    return mode_product_impl<false>(x, mode, a);
}

DenseTensor mode_product_transposed(const DenseTensor& x, std::size_t mode, const Matrix& a) {
    return mode_product_impl<true>(x, mode, a);
}

DenseTensor multi_mode_product(const DenseTensor& x, std::span<const ModeOperand> operands) {
    std::vector<bool> seen(x.order(), false);
    for (const auto& op : operands) {
        check_mode(x, op.mode);
        if (seen[op.mode]) throw DimensionError("multi_mode_product: mode " + std::to_string(op.mode + 1) + " repeated");
        seen[op.mode] = true;
    }
    // Shrinking operands first keeps intermediates small.
    std::vector<const ModeOperand*> order;
    order.reserve(operands.size());
    for (const auto& op : operands) order.push_back(&op);
    auto ratio = [](const ModeOperand* op) {
        const Matrix& a = op->matrix.get();
        const double out = static_cast<double>(op->transposed ? a.cols() : a.rows());
        const double in = static_cast<double>(op->transposed ? a.rows() : a.cols());
        return out / in;
    };
    std::stable_sort(order.begin(), order.end(), [&](auto* l, auto* r) { return ratio(l) < ratio(r); });

    DenseTensor out = x;
    for (const ModeOperand* op : order)
        out = op->transposed ? mode_product_transposed(out, op->mode, op->matrix.get())
                             : mode_product(out, op->mode, op->matrix.get());
    return out;
}

Matrix unfold_product(const DenseTensor& x, const DenseTensor& y, std::size_t mode) {
    check_mode(x, mode);
    if (x.dims() != y.dims()) throw DimensionError("unfold_product: tensors of different dims");
    const ModeSplit s = split_at(x.dims(), mode);
    const auto p = static_cast<Eigen::Index>(s.extent);
    Matrix out = Matrix::Zero(p, p);
    if (s.left == 1) {
        Eigen::Map<const Matrix> xs(x.data().data(), p, static_cast<Eigen::Index>(s.right));
        Eigen::Map<const Matrix> ys(y.data().data(), p, static_cast<Eigen::Index>(s.right));
        out.noalias() = xs * ys.transpose();
        return out;
    }
    // X^(d) = [S_0^T, S_1^T, ...] with S_r the left x p_d slab for trailing index r.
    const auto left = static_cast<Eigen::Index>(s.left);
    for (std::size_t r = 0; r < s.right; ++r) {
        ConstBlock xs(x.data().data() + r * s.left * s.extent, left, p, Eigen::OuterStride<>(left));
        ConstBlock ys(y.data().data() + r * s.left * s.extent, left, p, Eigen::OuterStride<>(left));
        out.noalias() += xs.transpose() * ys;
    }
    return out;
}

Vector vectorize(const DenseTensor& x) { return x.as_vector(); }

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix kronecker_reversed(std::span<const Matrix> mats) {
    if (mats.empty()) return Matrix::Identity(1, 1);
    Matrix out = mats.front();
    for (std::size_t i = 1; i < mats.size(); ++i) out = kronecker(mats[i], out);
    return out;
}

double frobenius_norm(const DenseTensor& x) { return x.as_vector().norm(); }

double frobenius_norm(const Matrix& m) { return m.norm(); }

}  // namespace tfm
