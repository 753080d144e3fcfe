#include <gtest/gtest.h>

#include <cmath>

#include "blockfolio/corrcore.hpp"
#include "test_util.hpp"

namespace bf = blockfolio;
using bf::Matrix;

namespace {

bf::CorrelationMatrix corr_of(const Matrix& m) { return {bf::default_tickers(m.rows()), m}; }

using bf::testing::naive_cord;

}  // namespace

TEST(Standardize, TwoPointColumn) {
  Matrix x(2, 1);
  x << 1, 3;
  const auto z = bf::standardize(x, {});
  EXPECT_NEAR(z.values(0, 0), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(z.values(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Standardize, AlreadyStandardIsUnchanged) {
  Matrix x(4, 1);
  const double s = std::sqrt(3.0) / 2.0;  // sample sd of {-1,-1,1,1} is 2/sqrt(3)
  x << -s, -s, s, s;
  const auto z = bf::standardize(x, {});
  EXPECT_LT((z.values - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Standardize, ConstantColumnFails) {
  Matrix x(3, 2);
  x << 1, 5, 2, 5, 4, 5;
  try {
    (void)bf::standardize(x, {"a", "b"});
    FAIL() << "expected ConstantColumn";
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::constant_column);
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
}

TEST(Standardize, TooFewRows) {
  Matrix x(1, 2);
  x << 1, 2;
  try {
    (void)bf::standardize(x, {});
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::too_few_rows);
  }
}

TEST(Standardize, MeanZeroSdOneAndIdempotent) {
  bf::Rng rng(11);
  Matrix x(37, 6);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = 0.01 * rng.normal() + 0.3 * j;
  const auto z = bf::standardize(x, {});
  for (Eigen::Index j = 0; j < z.values.cols(); ++j) {
    const auto col = z.values.col(j);
    EXPECT_NEAR(col.mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt((col.array() - col.mean()).square().sum() / 36.0), 1.0, 1e-12);
  }
  const auto zz = bf::standardize(z.values, z.tickers);
  EXPECT_LT((zz.values - z.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SampleCorrelation, PerfectAndAntiCorrelation) {
  Matrix x(5, 3);
  x << 1, 1, -1, 2, 2, -2, 4, 4, -4, 3, 3, -3, 9, 9, -9;
  const auto c = bf::sample_correlation(bf::standardize(x, {}));
  EXPECT_DOUBLE_EQ(c.values(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(c.values(0, 2), -1.0);
}

TEST(SampleCorrelation, PearsonHandValue) {
  Matrix x(4, 2);
  x << 1, 1, 2, 2, 3, 4, 4, 3;
  const auto c = bf::sample_correlation(bf::standardize(x, {}));
  EXPECT_NEAR(c.values(0, 1), 0.8, 1e-14);
  EXPECT_DOUBLE_EQ(c.values(0, 1), c.values(1, 0));
}

TEST(SampleCorrelation, UnitDiagonalOnRandomPanels) {
  bf::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(10 + trial, 8);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal() * (j + 1);
    const auto c = bf::sample_correlation(bf::standardize(x, {}));
    for (Eigen::Index j = 0; j < 8; ++j) EXPECT_NEAR(c.values(j, j), 1.0, 1e-12);
    EXPECT_LE(c.values.maxCoeff(), 1.0);
    EXPECT_GE(c.values.minCoeff(), -1.0);
  }
}

TEST(Cord, BlockExample) {
  Matrix rho(3, 3);
  rho << 1, .8, .2, .8, 1, .2, .2, .2, 1;
  const auto d = bf::cord_matrix(corr_of(rho));
  EXPECT_DOUBLE_EQ(d.values(0, 1), 0.0);
  EXPECT_NEAR(d.values(0, 2), 0.6, 1e-15);
  EXPECT_NEAR(d.values(1, 2), 0.6, 1e-15);
}

TEST(Cord, IdentityGivesZeros) {
  for (int d : {3, 7}) {
    const auto out = bf::cord_matrix(corr_of(Matrix::Identity(d, d)));
    EXPECT_EQ(out.values.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Cord, TwoAssetsIsZero) {
  Matrix rho(2, 2);
  rho << 1, 0.3, 0.3, 1;
  EXPECT_EQ(bf::cord_matrix(corr_of(rho)).values(0, 1), 0.0);
}

TEST(Cord, SymmetricZeroDiagonalAndMatchesNaive) {
  bf::Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = bf::testing::random_correlation(3 + trial % 18, rng);
    const auto d = bf::cord_matrix(c);
    EXPECT_TRUE(d.values == d.values.transpose());
    EXPECT_EQ(d.values.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(d.values.minCoeff(), 0.0);
    EXPECT_TRUE(d.values == naive_cord(c.values));
  }
}

TEST(Cord, ThreadCountDoesNotChangeResult) {
  bf::Rng rng(9);
  const auto c = bf::testing::random_correlation(40, rng);
  bf::set_max_threads(1);
  const auto a = bf::cord_matrix(c);
  bf::set_max_threads(4);
  const auto b = bf::cord_matrix(c);
  bf::set_max_threads(0);
  EXPECT_TRUE(a.values == b.values);
}

TEST(InvSqrt, IdentityAndDiagonal) {
  EXPECT_LT((bf::inv_sqrt(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  Matrix m(2, 2);
  m << 4, 0, 0, 9;
  const Matrix r = bf::inv_sqrt(m);
  EXPECT_NEAR(r(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(r(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r(0, 1), 0.0, 1e-15);
}

TEST(InvSqrt, RoundTripOnRandomSpd) {
  bf::Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rho = bf::testing::random_correlation(5, rng).values;
    const Matrix m = bf::inv_sqrt(rho);
    const Matrix i = m * rho * m;
    EXPECT_LT((i - Matrix::Identity(5, 5)).cwiseAbs().rowwise().sum().maxCoeff(), 1e-8);
  }
}

TEST(InvSqrt, ClipsSingularInput) {
  Matrix m = Matrix::Ones(3, 3);  // rank one
  const Matrix r = bf::inv_sqrt(m, 1e-6);
  EXPECT_TRUE(r.allFinite());
  EXPECT_LE(r.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(1e-6) + 1.0);
}
