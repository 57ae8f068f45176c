#include "tfm/errors.hpp"
#include "tfm/tensor.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace tfm {
namespace {

using testing::naive_kron;
using testing::naive_unfold;
using testing::random_matrix;
using testing::random_tensor;

DenseTensor iota_tensor(const Dims& dims) {
    std::vector<double> v(dims_product(dims));
    std::iota(v.begin(), v.end(), 1.0);
    return DenseTensor(dims, v);
}

TEST(Tensor, StorageOrderIsFirstIndexFastest) {
    DenseTensor x({2, 3, 4});
    x.at({1, 2, 3}) = 7.0;
    EXPECT_EQ(x[1 + 2 * 2 + 3 * 6], 7.0);
    EXPECT_THROW(x.at({2, 0, 0}), DimensionError);
    EXPECT_THROW(DenseTensor({2, 0}), DimensionError);
    EXPECT_THROW(DenseTensor({2, 2}, std::vector<double>(3)), DimensionError);
}

TEST(Tensor, UnfoldHandExamples) {
    const DenseTensor x = iota_tensor({2, 2, 2});
    Matrix m1(2, 4), m2(2, 4);
    m1 << 1, 3, 5, 7, 2, 4, 6, 8;
    m2 << 1, 2, 5, 6, 3, 4, 7, 8;
    EXPECT_EQ(unfold(x, 0), m1);
    EXPECT_EQ(unfold(x, 1), m2);
    EXPECT_THROW(unfold(x, 3), DimensionError);
}

TEST(Tensor, UnfoldOfVectorIsColumn) {
    const DenseTensor v({3}, {1.0, 2.0, 3.0});
    const Matrix m = unfold(v, 0);
    ASSERT_EQ(m.rows(), 3);
    ASSERT_EQ(m.cols(), 1);
    EXPECT_EQ(m(2, 0), 3.0);
}

TEST(Tensor, UnfoldMatchesIndexFormulaAndVisitsEachEntryOnce) {
    Rng rng(11);
    for (const Dims& dims : {Dims{3, 4, 5}, Dims{2, 3}, Dims{4}, Dims{2, 3, 2, 3}}) {
        const DenseTensor x = iota_tensor(dims);
        for (std::size_t d = 0; d < dims.size(); ++d) {
            const Matrix m = unfold(x, d);
            EXPECT_EQ(m, naive_unfold(x, d));
            // iota entries are distinct, so a permutation check is a sort.
            std::vector<double> seen(m.data(), m.data() + m.size());
            std::sort(seen.begin(), seen.end());
            std::vector<double> expect(x.size());
            std::iota(expect.begin(), expect.end(), 1.0);
            EXPECT_EQ(seen, expect);
        }
    }
}

TEST(Tensor, FoldInvertsUnfoldBitExact) {
    Rng rng(3);
    const DenseTensor r = random_tensor({3, 4, 5}, rng);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(fold(unfold(r, d), d, r.dims()), r);

    const DenseTensor x = iota_tensor({2, 2, 2});
    EXPECT_EQ(fold(unfold(x, 1), 1, {2, 2, 2}), x);

    Matrix col(2, 1);
    col << 5, 6;
    EXPECT_EQ(fold(col, 0, {2}), DenseTensor({2}, {5.0, 6.0}));
    EXPECT_THROW(fold(col, 0, {3}), DimensionError);
}

TEST(Tensor, FoldUnfoldPropertyRandomShapes) {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t order = 1 + rng.next() % 4;
        Dims dims;
        for (std::size_t d = 0; d < order; ++d) dims.push_back(1 + rng.next() % 4);
        const DenseTensor x = random_tensor(dims, rng);
        for (std::size_t d = 0; d < order; ++d) EXPECT_EQ(fold(unfold(x, d), d, dims), x);
    }
}

TEST(Tensor, ModeProductIdentityAndHandExample) {
    Rng rng(5);
    const DenseTensor x = random_tensor({3, 4, 2}, rng);
    for (std::size_t d = 0; d < 3; ++d)
        EXPECT_EQ(mode_product(x, d, Matrix::Identity(x.dim(d), x.dim(d))), x);

    DenseTensor m({2, 2});
    m.at({0, 0}) = 1;
    m.at({0, 1}) = 2;
    m.at({1, 0}) = 3;
    m.at({1, 1}) = 4;
    Matrix ones(1, 2);
    ones << 1, 1;
    const DenseTensor y = mode_product(m, 0, ones);
    ASSERT_EQ(y.dims(), (Dims{1, 2}));
    EXPECT_EQ(y[0], 4.0);
    EXPECT_EQ(y[1], 6.0);

    EXPECT_THROW(mode_product(x, 0, Matrix::Identity(4, 4)), DimensionError);
}

TEST(Tensor, ModeProductUnfoldIdentity) {
    Rng rng(21);
    const DenseTensor x = random_tensor({3, 4, 5}, rng);
    for (std::size_t d = 0; d < 3; ++d) {
        const Matrix a = random_matrix(6, static_cast<Eigen::Index>(x.dim(d)), rng);
        const Matrix lhs = unfold(mode_product(x, d, a), d);
        const Matrix rhs = a * unfold(x, d);
        EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
        const Matrix viaT = unfold(mode_product_transposed(x, d, a.transpose()), d);
        EXPECT_LE((viaT - rhs).norm(), 1e-12 * rhs.norm());
    }
}

TEST(Tensor, ModeProductsOnDistinctModesCommute) {
    Rng rng(8);
    const DenseTensor x = random_tensor({2, 3, 2}, rng);
    const Matrix a = random_matrix(4, 2, rng);
    const Matrix b = random_matrix(2, 3, rng);
    const DenseTensor ab = mode_product(mode_product(x, 0, a), 1, b);
    const DenseTensor ba = mode_product(mode_product(x, 1, b), 0, a);
    EXPECT_LE((ab.as_vector() - ba.as_vector()).norm(), 1e-12 * ab.as_vector().norm());
}

TEST(Tensor, MultiModeProductEdgeCases) {
    Rng rng(4);
    const DenseTensor x = random_tensor({2, 3, 4}, rng);
    EXPECT_EQ(multi_mode_product(x, {}), x);

    const Matrix i2 = Matrix::Identity(2, 2), i3 = Matrix::Identity(3, 3), i4 = Matrix::Identity(4, 4);
    const std::vector<ModeOperand> ids{{0, i2}, {1, i3, true}, {2, i4}};
    EXPECT_EQ(multi_mode_product(x, ids), x);

    const std::vector<ModeOperand> dup{{0, i2}, {0, i2}};
    EXPECT_THROW(multi_mode_product(x, dup), DimensionError);
    const std::vector<ModeOperand> bad{{1, i2}};
    EXPECT_THROW(multi_mode_product(x, bad), DimensionError);
}

TEST(Tensor, MultiModeProductMatchesExplicitKronecker) {
    Rng rng(17);
    // vec(F x_1 A_1 ... x_D A_D) = (A_D (x) ... (x) A_1) vec(F)
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t order = 1 + trial % 3;
        Dims core_dims, out_dims;
        std::vector<Matrix> mats;
        for (std::size_t d = 0; d < order; ++d) {
            core_dims.push_back(1 + rng.next() % 4);
            out_dims.push_back(1 + rng.next() % 4);
            mats.push_back(random_matrix(static_cast<Eigen::Index>(out_dims[d]),
                                         static_cast<Eigen::Index>(core_dims[d]), rng));
        }
        const DenseTensor f = random_tensor(core_dims, rng);
        std::vector<ModeOperand> ops;
        for (std::size_t d = 0; d < order; ++d) ops.push_back({d, mats[d]});
        const Vector lhs = vectorize(multi_mode_product(f, ops));

        Matrix k = mats[0];
        for (std::size_t d = 1; d < order; ++d) k = naive_kron(mats[d], k);
        const Vector rhs = k * vectorize(f);
        EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
    }
}

TEST(Tensor, VectorizeFollowsStorageOrder) {
    DenseTensor x({2, 2});
    x.at({0, 0}) = 1;
    x.at({1, 0}) = 2;
    x.at({0, 1}) = 3;
    x.at({1, 1}) = 4;
    EXPECT_EQ(vectorize(x), (Vector(4) << 1, 2, 3, 4).finished());

    Rng rng(2);
    const Matrix m = random_matrix(3, 5, rng);
    const Vector v = vectorize(fold(m, 0, {3, 5}));
    EXPECT_EQ(v, Eigen::Map<const Vector>(m.data(), m.size()));

    const DenseTensor vec1({3}, {7.0, 8.0, 9.0});
    EXPECT_EQ(vectorize(vec1), (Vector(3) << 7, 8, 9).finished());
}

TEST(Tensor, KroneckerProperties) {
    EXPECT_EQ(kronecker(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Matrix::Identity(6, 6));

    Rng rng(12);
    const Matrix b = random_matrix(3, 2, rng);
    Matrix two(1, 1);
    two << 2;
    EXPECT_EQ(kronecker(two, b), 2.0 * b);

    const Matrix a = random_matrix(2, 3, rng);
    EXPECT_EQ(kronecker(a, b), naive_kron(a, b));

    const Matrix p = random_matrix(2, 2, rng), q = random_matrix(2, 2, rng);
    const Matrix r = random_matrix(2, 2, rng), s = random_matrix(2, 2, rng);
    const Matrix lhs = kronecker(p, q) * kronecker(r, s);
    const Matrix rhs = kronecker(p * r, q * s);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(Tensor, FrobeniusNorm) {
    EXPECT_EQ(frobenius_norm(DenseTensor({3, 2})), 0.0);
    EXPECT_DOUBLE_EQ(frobenius_norm(DenseTensor({2, 2}, {3.0, 4.0, 0.0, 0.0})), 5.0);
    Rng rng(6);
    const DenseTensor x = random_tensor({3, 4, 5}, rng);
    for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(frobenius_norm(unfold(x, d)), frobenius_norm(x), 1e-12);
}

TEST(Tensor, UnfoldProductMatchesExplicitUnfolding) {
    Rng rng(31);
    const DenseTensor x = random_tensor({3, 4, 5}, rng);
    const DenseTensor y = random_tensor({3, 4, 5}, rng);
    for (std::size_t d = 0; d < 3; ++d) {
        const Matrix expect = unfold(x, d) * unfold(y, d).transpose();
        EXPECT_LE((unfold_product(x, y, d) - expect).norm(), 1e-12 * expect.norm());
    }
}

TEST(TensorSeries, RejectsMismatchedShapes) {
    TensorSeries s(Dims{2, 3});
    s.push_back(DenseTensor({2, 3}));
    EXPECT_THROW(s.push_back(DenseTensor({3, 2})), DimensionError);
    EXPECT_EQ(s.length(), 1u);
    EXPECT_THROW(TensorSeries(std::vector<DenseTensor>{}), DimensionError);
}

}  // namespace
}  // namespace tfm
