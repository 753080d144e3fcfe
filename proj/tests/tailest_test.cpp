#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "blockfolio/tailest.hpp"
#include "test_util.hpp"

namespace bf = blockfolio;
using bf::Matrix;

namespace {

using bf::testing::exact_quantiles;

}  // namespace

TEST(FitTailCoordinate, ExponentialLaw) {
  const auto y = exact_quantiles(400, 1.0, 1.0);
  const auto fit = bf::fit_tail_coordinate(y, 100);
  EXPECT_NEAR(fit.alpha, 1.0, 1e-6);
  EXPECT_NEAR(fit.ell, 1.0, 1e-6);
}

TEST(FitTailCoordinate, WeibullHalf) {
  const auto y = exact_quantiles(400, 0.5, 2.0);
  const auto fit = bf::fit_tail_coordinate(y, 100);
  EXPECT_NEAR(fit.alpha, 0.5, 1e-6);
  EXPECT_NEAR(fit.ell, 2.0, 1e-6);
}

TEST(FitTailCoordinate, RecoversParameterGrid) {
  for (double alpha : {0.5, 1.0, 1.5, 2.0})
    for (double ell : {0.5, 1.0, 2.0}) {
      const auto fit = bf::fit_tail_coordinate(exact_quantiles(1000, alpha, ell), 250);
      EXPECT_NEAR(fit.alpha, alpha, 1e-6) << alpha << " " << ell;
      EXPECT_NEAR(fit.ell, ell, 1e-6) << alpha << " " << ell;
    }
}

TEST(FitTailCoordinate, EqualTailIsDegenerate) {
  std::vector<double> y(20, 3.0);
  y[0] = 1.0;
  try {
    (void)bf::fit_tail_coordinate(y, 5);
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::degenerate_fit);
  }
}

TEST(FitTailCoordinate, ZeroObservationIsDegenerate) {
  std::vector<double> y{0.0, 0.0, 0.0, 1.0, 2.0};
  EXPECT_THROW((void)bf::fit_tail_coordinate(y, 3), bf::Error);
}

TEST(FitTailCoordinate, RejectsBadK) {
  std::vector<double> y{1.0, 2.0, 3.0};
  EXPECT_THROW((void)bf::fit_tail_coordinate(y, 3), bf::Error);
  EXPECT_THROW((void)bf::fit_tail_coordinate(y, 1), bf::Error);
}

TEST(FitTailCoordinate, ScaleEquivariance) {
  bf::Rng rng(3);
  std::vector<double> y(300);
  for (auto& v : y) v = std::abs(rng.laplace_unit());
  std::sort(y.begin(), y.end());
  const auto base = bf::fit_tail_coordinate(y, 75);
  for (double c : {0.01, 3.5, 1000.0}) {
    std::vector<double> scaled(y);
    for (auto& v : scaled) v *= c;
    const auto fit = bf::fit_tail_coordinate(scaled, 75);
    EXPECT_NEAR(fit.alpha, base.alpha, 1e-9 * base.alpha);
    EXPECT_NEAR(fit.ell, c * base.ell, 1e-9 * c * base.ell);
  }
}

TEST(AggregateTail, MinAlphaMaxEll) {
  const std::vector<bf::CoordinateFit> fits{{1.0, 1.0}, {0.5, 0.8}};
  const auto t = bf::aggregate_tail(fits);
  EXPECT_DOUBLE_EQ(t.alpha, 0.5);
  EXPECT_DOUBLE_EQ(t.ell, 1.0);
}

TEST(AggregateTail, ClampsToRange) {
  const std::vector<bf::CoordinateFit> light{{3.2, 1.0}};
  EXPECT_DOUBLE_EQ(bf::aggregate_tail(light).alpha, 2.0);
  EXPECT_DOUBLE_EQ(bf::aggregate_tail(light).raw_alpha, 3.2);
  const std::vector<bf::CoordinateFit> heavy{{0.02, 1.0}};
  const auto t = bf::aggregate_tail(heavy);
  EXPECT_DOUBLE_EQ(t.alpha, bf::kMinAlpha);
  EXPECT_TRUE(t.floored);
}

TEST(WhitenAbs, IdentityCorrelationIsAbs) {
  Matrix z(4, 2);
  z << -1, 2, 0.5, -0.5, 1, -1, -0.5, -0.5;
  const bf::StandardizedPanel p{{"a", "b"}, z};
  const bf::CorrelationMatrix c{{"a", "b"}, Matrix::Identity(2, 2)};
  EXPECT_LT((bf::whiten_abs(p, c) - z.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WhitenAbs, SingleColumn) {
  Matrix z(3, 1);
  z << -1, 0, 1;
  const bf::StandardizedPanel p{{"a"}, z};
  const bf::CorrelationMatrix c{{"a"}, Matrix::Ones(1, 1)};
  EXPECT_LT((bf::whiten_abs(p, c) - z.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WhitenAbs, DecorrelatesSampleCorrelation) {
  bf::Rng rng(8);
  Matrix x(500, 2);
  for (Eigen::Index t = 0; t < 500; ++t) {
    const double f = rng.normal();
    x(t, 0) = f + rng.normal();
    x(t, 1) = f + rng.normal();
  }
  const auto z = bf::standardize(x, {});
  const auto c = bf::sample_correlation(z);
  EXPECT_GT(c.values(0, 1), 0.3);
  // Pre-absolute-value whitened panel: X* rho^{-1/2}.
  const Matrix w = z.values * bf::inv_sqrt(c);
  const Matrix centered = w.rowwise() - w.colwise().mean();
  const Matrix cov = centered.transpose() * centered / 499.0;
  EXPECT_NEAR(cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1)), 0.0, 1e-8);
}

TEST(EstimateTail, SingleCoordinateMatchesDirectFit) {
  bf::Rng rng(21);
  Matrix x(800, 1);
  for (Eigen::Index t = 0; t < 800; ++t) x(t, 0) = rng.student_t_unit(5.0);
  const auto z = bf::standardize(x, {});
  const auto c = bf::sample_correlation(z);
  const auto t = bf::estimate_tail(z, c, {200});
  std::vector<double> y(800);
  const Matrix w = bf::whiten_abs(z, c);
  for (Eigen::Index i = 0; i < 800; ++i) y[static_cast<std::size_t>(i)] = w(i, 0);
  std::sort(y.begin(), y.end());
  const auto fit = bf::fit_tail_coordinate(y, 200);
  EXPECT_DOUBLE_EQ(t.raw_alpha, fit.alpha);
  EXPECT_DOUBLE_EQ(t.alpha, std::clamp(fit.alpha, bf::kMinAlpha, bf::kMaxAlpha));
  EXPECT_DOUBLE_EQ(t.ell, fit.ell);
}

TEST(EstimateTail, AggregationIsMonotone) {
  bf::Rng rng(4);
  Matrix x(600, 4);
  for (Eigen::Index t = 0; t < 600; ++t) {
    x(t, 0) = rng.normal();
    x(t, 1) = rng.laplace_unit();
    x(t, 2) = rng.student_t_unit(4.5);
    x(t, 3) = rng.normal() + 0.5 * x(t, 1);
  }
  const auto z = bf::standardize(x, {});
  const auto c = bf::sample_correlation(z);
  const auto t = bf::estimate_tail(z, c, {150});
  const Matrix w = bf::whiten_abs(z, c);
  for (Eigen::Index r = 0; r < 4; ++r) {
    std::vector<double> y(w.col(r).data(), w.col(r).data() + 600);
    std::sort(y.begin(), y.end());
    const auto fit = bf::fit_tail_coordinate(y, 150);
    EXPECT_LE(t.raw_alpha, fit.alpha);
    EXPECT_GE(t.ell, fit.ell);
  }
}

// |N(0,1)| quantile at upper-tail probability q: solves erfc(t / sqrt 2) = q.
double abs_normal_isf(double q) {
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// The regression runs over the top quarter of the sample, where Gaussian
// log-quantiles still curve upward, so the fitted alpha sits well below the
// asymptotic value 2. The exact-quantile oracle pins the population target.
TEST(EstimateTail, GaussianPanelMatchesExactQuantileOracle) {
  const std::size_t n = 100000;
  const auto cfg = bf::TailFitConfig::from_fraction(n, 0.25);
  std::vector<double> exact(n);
  for (std::size_t p = 1; p < n; ++p)
    exact[p - 1] = abs_normal_isf(static_cast<double>(n - p) / static_cast<double>(n));
  exact[n - 1] = exact[n - 2] + 1.0;
  const double oracle_alpha = bf::fit_tail_coordinate(exact, cfg.k).alpha;
  EXPECT_NEAR(oracle_alpha, 1.175, 1e-3);

  bf::Rng rng(99);
  Matrix x(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    for (Eigen::Index j = 0; j < 3; ++j) x(t, j) = rng.normal();
  const auto z = bf::standardize(x, {});
  const bf::CorrelationMatrix identity{z.tickers, Matrix::Identity(3, 3)};
  const auto t = bf::estimate_tail(z, identity, cfg);
  EXPECT_NEAR(t.raw_alpha, oracle_alpha, 0.15);
  EXPECT_DOUBLE_EQ(t.alpha, t.raw_alpha);
}

TEST(EstimateTail, DegenerateCoordinateIsReported) {
  Matrix z(8, 2);
  z << 1, 1, -1, 1, 1, 1, -1, 1, 1, -1, -1, -1, 1, -1, -1, -1;
  const bf::StandardizedPanel p{{"a", "b"}, z};
  const bf::CorrelationMatrix c{{"a", "b"}, Matrix::Identity(2, 2)};
  try {
    (void)bf::estimate_tail(p, c, {3});
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::degenerate_fit);
    EXPECT_NE(std::string(e.what()).find("coordinate 0"), std::string::npos);
  }
}
