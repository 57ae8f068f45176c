#include "tfm/errors.hpp"
#include "tfm/spectral.hpp"
#include "tfm/varimax.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tfm {
namespace {

using testing::random_matrix;
using testing::random_orthogonal;

TEST(Varimax, SingleColumnIsUnchanged) {
    Rng rng(1);
    const Matrix a = random_matrix(6, 1, rng);
    const VarimaxResult r = varimax(a);
    EXPECT_LE((r.rotated - a).norm(), 1e-14);
    EXPECT_NEAR(std::abs(r.rotation(0, 0)), 1.0, 1e-14);
}

TEST(Varimax, AxisAlignedLoadingsAreAFixedPoint) {
    Matrix a = Matrix::Zero(6, 2);
    a.block(0, 0, 3, 1).setConstant(1.0);
    a.block(3, 1, 3, 1).setConstant(1.0);
    const VarimaxResult r = varimax(a);
    EXPECT_LE((r.rotated.cwiseAbs() - a).norm(), 1e-10);
}

TEST(Varimax, RecoversRotatedSimpleStructure) {
    Matrix a = Matrix::Zero(8, 2);
    a.block(0, 0, 4, 1).setConstant(1.0);
    a.block(4, 1, 4, 1).setConstant(1.0);
    const double th = 0.4;
    Matrix rot(2, 2);
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const VarimaxResult r = varimax(a * rot);
    EXPECT_NEAR(varimax_criterion(r.rotated), varimax_criterion(a), 1e-10);
}

TEST(Varimax, PropertiesOnRandomLoadings) {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index k = 2 + trial % 3;
        const Matrix a = std::sqrt(12.0) * random_orthogonal(12, rng).leftCols(k);
        const VarimaxResult r = varimax(a);
        EXPECT_LE((r.rotation.transpose() * r.rotation - Matrix::Identity(k, k)).norm(), 1e-12);
        EXPECT_LE((r.rotated - a * r.rotation).norm(), 1e-10);
        EXPECT_LE((projection_matrix(r.rotated) - projection_matrix(a)).norm(), 1e-10);
        EXPECT_GE(varimax_criterion(r.rotated), varimax_criterion(a) - 1e-12);
    }
}

TEST(Varimax, Errors) {
    EXPECT_THROW(varimax(Matrix(3, 0)), DimensionError);
    Matrix bad = Matrix::Ones(3, 2);
    bad(1, 1) = std::nan("");
    EXPECT_THROW(varimax(bad), NumericError);
}

}  // namespace
}  // namespace tfm
