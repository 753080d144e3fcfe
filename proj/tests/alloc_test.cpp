#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "blockfolio/alloc.hpp"
#include "blockfolio/blocksim.hpp"
#include "test_util.hpp"

namespace bf = blockfolio;
using bf::Matrix;
using bf::Vector;

namespace {

bf::CovarianceMatrix cov_of(const Matrix& m) { return {bf::default_tickers(m.rows()), m}; }

Matrix cov2(double v1, double v2, double c) {
  Matrix m(2, 2);
  m << v1, c, c, v2;
  return m;
}

using bf::testing::support_enumeration_min_variance;

double relative_spread(const Vector& v) { return (v.maxCoeff() - v.minCoeff()) / v.mean(); }

}  // namespace

TEST(SelectRepresentatives, Examples) {
  const auto p = bf::Partition::from_clusters({{0, 1}, {2}}, 3);
  const std::vector<double> v{4, 1, 9};
  EXPECT_EQ(bf::select_representatives(p, v), (std::vector<std::size_t>{1, 2}));
  const std::vector<double> w{1, 2, 3};
  EXPECT_EQ(bf::select_representatives(bf::Partition::singletons(3), w), (std::vector<std::size_t>{0, 1, 2}));
  const std::vector<double> tie{2, 2, 5};
  EXPECT_EQ(bf::select_representatives(p, tie), (std::vector<std::size_t>{0, 2}));
}

TEST(MinVariance, ClosedForms) {
  auto w = bf::min_variance_weights(cov_of(cov2(1, 4, 0))).weights;
  EXPECT_NEAR(w(0), 0.8, 1e-8);
  EXPECT_NEAR(w(1), 0.2, 1e-8);
  w = bf::min_variance_weights(cov_of(cov2(1, 4, 1.8))).weights;
  EXPECT_NEAR(w(0), 1.0, 1e-8);
  EXPECT_NEAR(w(1), 0.0, 1e-8);
}

TEST(MinVariance, IdenticalAssetsGiveUniformWeights) {
  const auto r = bf::min_variance_weights(cov_of(Matrix::Constant(4, 4, 0.5)));
  EXPECT_TRUE(r.ridge_applied);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(r.weights(i), 0.25, 1e-12);
}

TEST(MinVariance, MatchesSupportEnumeration) {
  bf::Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(7);
    Matrix s = bf::testing::random_spd(d, rng);
    Vector vol(static_cast<Eigen::Index>(d));
    for (auto& v : vol) v = 0.5 + 1.5 * rng.uniform();
    s = vol.asDiagonal() * s * vol.asDiagonal();
    const auto w = bf::min_variance_weights(cov_of(s)).weights;
    EXPECT_NEAR(w.sum(), 1.0, 1e-8);
    EXPECT_GE(w.minCoeff(), -1e-10);
    const double oracle = support_enumeration_min_variance(s);
    EXPECT_LE(w.dot(s * w), oracle * (1.0 + 1e-9));
    EXPECT_LE(w.dot(s * w), s.diagonal().minCoeff() * (1.0 + 1e-12));
  }
}

TEST(MeanVariance, Examples) {
  Vector mu(2);
  mu << 0.05, 0.15;
  const auto w = bf::mean_variance_weights(cov_of(Matrix::Identity(2, 2)), mu, 0.10).weights;
  EXPECT_NEAR(w(0), 0.5, 1e-8);
  EXPECT_NEAR(w(1), 0.5, 1e-8);
  try {
    (void)bf::mean_variance_weights(cov_of(Matrix::Identity(2, 2)), mu, 0.20);
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::infeasible);
  }
}

TEST(MeanVariance, BindingTargetAgainstEnumeration) {
  // Binding case: the optimum lies on mu'w = target; enumerate supports of
  // the two-equality problem as an oracle.
  bf::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.below(6);
    const Matrix s = bf::testing::random_spd(d, rng);
    Vector mu(static_cast<Eigen::Index>(d));
    for (auto& m : mu) m = 0.2 * rng.uniform() - 0.05;
    const auto mv = bf::min_variance_weights(cov_of(s)).weights;
    const double lo = mu.dot(mv), hi = mu.maxCoeff();
    const double target = lo + (hi - lo) * (0.2 + 0.6 * rng.uniform());
    const auto w = bf::mean_variance_weights(cov_of(s), mu, target).weights;
    EXPECT_NEAR(w.sum(), 1.0, 1e-8);
    EXPECT_GE(w.minCoeff(), -1e-10);
    EXPECT_GE(mu.dot(w), target - 1e-9);

    double best = std::numeric_limits<double>::infinity();
    const auto n = static_cast<Eigen::Index>(d);
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i)
        if (mask & (1u << i)) idx.push_back(i);
      const auto m = static_cast<Eigen::Index>(idx.size());
      Matrix kkt = Matrix::Zero(m + 2, m + 2);
      Vector rhs = Vector::Zero(m + 2);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = 2.0 * s(idx[a], idx[b]);
        kkt(a, m) = kkt(m, a) = 1.0;
        kkt(a, m + 1) = kkt(m + 1, a) = mu(idx[a]);
      }
      rhs(m) = 1.0;
      rhs(m + 1) = target;
      const Vector x = kkt.completeOrthogonalDecomposition().solve(rhs);
      Vector wf = Vector::Zero(n);
      for (Eigen::Index a = 0; a < m; ++a) wf(idx[a]) = x(a);
      if (wf.minCoeff() < -1e-12 || std::abs(wf.sum() - 1.0) > 1e-9 || std::abs(mu.dot(wf) - target) > 1e-9)
        continue;
      best = std::min(best, wf.dot(s * wf));
    }
    EXPECT_LE(w.dot(s * w), best * (1.0 + 1e-9) + 1e-15);
  }
}

TEST(MeanVariance, SlackTargetEqualsMinVariance) {
  bf::Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng.below(8);
    const Matrix s = bf::testing::random_spd(d, rng);
    Vector mu(static_cast<Eigen::Index>(d));
    for (auto& m : mu) m = rng.uniform();
    const auto mv = bf::min_variance_weights(cov_of(s)).weights;
    const auto w = bf::mean_variance_weights(cov_of(s), mu, mu.dot(mv) - 0.01).weights;
    EXPECT_LT((w - mv).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(RiskParity, Examples) {
  for (double rho : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
    const auto w = bf::risk_parity_weights(cov_of(cov2(2, 2, 2 * rho))).weights;
    EXPECT_NEAR(w(0), 0.5, 1e-12);
  }
  const auto w = bf::risk_parity_weights(cov_of(cov2(1, 4, 0))).weights;
  EXPECT_NEAR(w(0), 2.0 / 3.0, 1e-8);
  EXPECT_NEAR(w(1), 1.0 / 3.0, 1e-8);
  const auto u = bf::risk_parity_weights(cov_of(Matrix::Identity(5, 5) * 3.0)).weights;
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(u(i), 0.2, 1e-12);
}

TEST(RiskParity, EqualContributionsOnRandomCovariances) {
  bf::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.below(19);
    Matrix s = bf::testing::random_spd(d, rng);
    Vector vol(static_cast<Eigen::Index>(d));
    for (auto& v : vol) v = 0.01 + 0.05 * rng.uniform();
    s = vol.asDiagonal() * s * vol.asDiagonal();
    const auto w = bf::risk_parity_weights(cov_of(s)).weights;
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GT(w.minCoeff(), 0.0);
    EXPECT_LT(relative_spread(bf::risk_contributions(s, w)), 1e-6);
    EXPECT_LT(bf::risk_parity_residual(s, w), 1e-10);
  }
}

TEST(RiskParity, DiagonalIsInverseVolatility) {
  bf::Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = static_cast<Eigen::Index>(2 + rng.below(15));
    Vector var(d);
    for (auto& v : var) v = 0.1 + 3.0 * rng.uniform();
    const auto w = bf::risk_parity_weights(cov_of(var.asDiagonal().toDenseMatrix())).weights;
    const Vector inv = var.cwiseSqrt().cwiseInverse();
    EXPECT_LT((w - inv / inv.sum()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Beta, Examples) {
  const std::vector<double> m{0.01, -0.02, 0.03, 0.0, -0.01};
  std::vector<double> twice, shifted;
  for (double x : m) {
    twice.push_back(2.0 * x);
    shifted.push_back(x + 0.5);
  }
  EXPECT_NEAR(bf::estimate_beta(twice, m), 2.0, 1e-12);
  EXPECT_NEAR(bf::estimate_beta(shifted, m), 1.0, 1e-12);
  const std::vector<double> mk{1, -1, 1, -1};
  const std::vector<double> orth{1, 1, -1, -1};
  EXPECT_NEAR(bf::estimate_beta(orth, mk), 0.0, 1e-12);
  const std::vector<double> flat{0.1, 0.1, 0.1, 0.1};
  try {
    (void)bf::estimate_beta(orth, flat);
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::zero_market_variance);
  }
}

TEST(Beta, ShiftInvariance) {
  bf::Rng rng(15);
  std::vector<double> a(100), m(100), a2(100), m2(100);
  for (std::size_t t = 0; t < 100; ++t) {
    m[t] = rng.normal();
    a[t] = 0.7 * m[t] + rng.normal();
    a2[t] = a[t] - 3.0;
    m2[t] = m[t] + 11.0;
  }
  EXPECT_NEAR(bf::estimate_beta(a, m), bf::estimate_beta(a2, m2), 1e-10);
}

TEST(BetaHedge, Examples) {
  bf::PortfolioWeights w{{"A", "B"}, Vector::Constant(2, 0.5)};
  const std::vector<double> betas{1.2, 0.8};
  const auto h = bf::beta_hedge(w, betas);
  EXPECT_NEAR(h.stock_weights(0), 0.25, 1e-15);
  EXPECT_NEAR(h.stock_weights(1), 0.25, 1e-15);
  EXPECT_NEAR(h.benchmark_weight, -0.5, 1e-15);
  // Stocks sum to 1/(1+beta) and the benchmark adds -beta/(1+beta), so the
  // total is (1-beta)/(1+beta); zero here.
  EXPECT_NEAR(h.stock_weights.sum() + h.benchmark_weight, 0.0, 1e-15);

  const std::vector<double> zero{0.0, 0.0};
  const auto z = bf::beta_hedge(w, zero);
  EXPECT_EQ(z.stock_weights, w.weights);
  EXPECT_EQ(z.benchmark_weight, 0.0);

  bf::PortfolioWeights single{{"A"}, Vector::Ones(1)};
  const std::vector<double> neg{-0.5};
  try {
    (void)bf::beta_hedge(single, neg);
    FAIL();
  } catch (const bf::Error& e) {
    EXPECT_EQ(e.code(), bf::ErrorCode::negative_beta);
  }
}

TEST(BetaHedge, ZeroBenchmarkExposure) {
  bf::Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = static_cast<Eigen::Index>(1 + rng.below(10));
    Vector w(d);
    for (auto& x : w) x = rng.uniform();
    w /= w.sum();
    std::vector<double> b(static_cast<std::size_t>(d));
    for (auto& x : b) x = 2.0 * rng.uniform();
    const auto h = bf::beta_hedge({bf::default_tickers(static_cast<std::size_t>(d)), w}, b);
    double exposure = h.benchmark_weight;
    for (Eigen::Index i = 0; i < d; ++i) exposure += h.stock_weights(i) * b[static_cast<std::size_t>(i)];
    EXPECT_NEAR(exposure, 0.0, 1e-8);
    EXPECT_NEAR(h.stock_weights.sum() + h.benchmark_weight, (1.0 - h.beta) / (1.0 + h.beta), 1e-12);
  }
}

TEST(SelectRepresentatives, LowestVariancePerClusterIsOptimal) {
  bf::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(4);
    bf::BlockmodelSpec spec;
    std::vector<std::size_t> sizes(k);
    for (std::size_t c = 0; c < k; ++c) {
      sizes[c] = 1 + rng.below(3);
      for (std::size_t m = 0; m < sizes[c]; ++m) spec.assignment.push_back(c);
    }
    const auto kk = static_cast<Eigen::Index>(k);
    Matrix a(kk, kk);
    for (auto& x : a.reshaped()) x = rng.uniform() - 0.5;
    Matrix f = a * a.transpose();
    const Vector dg = f.diagonal().cwiseSqrt().cwiseInverse();
    f = dg.asDiagonal() * f * dg.asDiagonal();
    f *= 0.2 + 0.75 * rng.uniform();
    spec.sigma_f = f;
    const Matrix rho = bf::implied_correlation(spec).values;
    const auto d = static_cast<Eigen::Index>(spec.d());
    Vector vol(d);
    for (auto& v : vol) v = 0.5 + 1.5 * rng.uniform();
    const Matrix s = vol.asDiagonal() * rho * vol.asDiagonal();

    std::vector<double> var(spec.d());
    for (std::size_t i = 0; i < spec.d(); ++i) var[i] = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    const auto reps = bf::select_representatives(bf::Partition(spec.assignment), var);
    auto variance_of = [&](const std::vector<std::size_t>& pick) {
      const auto m = static_cast<Eigen::Index>(pick.size());
      Matrix sub(m, m);
      for (Eigen::Index x = 0; x < m; ++x)
        for (Eigen::Index y = 0; y < m; ++y)
          sub(x, y) = s(static_cast<Eigen::Index>(pick[static_cast<std::size_t>(x)]),
                        static_cast<Eigen::Index>(pick[static_cast<std::size_t>(y)]));
      return support_enumeration_min_variance(sub);
    };
    const double chosen = variance_of(reps);
    // Enumerate every one-per-cluster selection.
    std::vector<std::size_t> offset(k, 0);
    std::vector<std::size_t> start(k, 0);
    for (std::size_t c = 1; c < k; ++c) start[c] = start[c - 1] + sizes[c - 1];
    for (;;) {
      std::vector<std::size_t> pick(k);
      for (std::size_t c = 0; c < k; ++c) pick[c] = start[c] + offset[c];
      EXPECT_LE(chosen, variance_of(pick) + 1e-9);
      std::size_t c = 0;
      while (c < k && ++offset[c] == sizes[c]) offset[c++] = 0;
      if (c == k) break;
    }
    EXPECT_NEAR(bf::min_variance_weights(cov_of([&] {
                  const auto m = static_cast<Eigen::Index>(reps.size());
                  Matrix sub(m, m);
                  for (Eigen::Index x = 0; x < m; ++x)
                    for (Eigen::Index y = 0; y < m; ++y)
                      sub(x, y) = s(static_cast<Eigen::Index>(reps[static_cast<std::size_t>(x)]),
                                    static_cast<Eigen::Index>(reps[static_cast<std::size_t>(y)]));
                  return sub;
                }()))
                    .weights.sum(),
                1.0, 1e-8);
  }
}

TEST(SampleCovariance, MatchesDefinition) {
  bf::Rng rng(18);
  Matrix r(30, 4);
  for (auto& x : r.reshaped()) x = rng.normal();
  const auto c = bf::sample_covariance(r).values;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double mi = r.col(i).mean(), mj = r.col(j).mean();
      double s = 0.0;
      for (Eigen::Index t = 0; t < 30; ++t) s += (r(t, i) - mi) * (r(t, j) - mj);
      EXPECT_NEAR(c(i, j), s / 29.0, 1e-14);
    }
}
