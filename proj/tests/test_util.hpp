#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "blockfolio/corrcore.hpp"
#include "blockfolio/partition.hpp"
#include "blockfolio/rng.hpp"

namespace blockfolio::testing {

// Correlation matrix of `rows` random Gaussian draws; exactly symmetric with unit diagonal.
inline CorrelationMatrix random_correlation(std::size_t d, Rng& rng, std::size_t rows = 0) {
  if (rows == 0) rows = 2 * d + 3;
  Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  Matrix c = x.transpose() * x;
  const Vector s = c.diagonal().cwiseSqrt().cwiseInverse();
  c = s.asDiagonal() * c * s.asDiagonal();
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
  return CorrelationMatrix{default_tickers(d), c.cwiseMax(-1.0).cwiseMin(1.0)};
}

inline Matrix random_spd(std::size_t d, Rng& rng) {
  Matrix x(static_cast<Eigen::Index>(d + 5), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  Matrix c = x.transpose() * x / static_cast<double>(x.rows());
  c += 0.05 * Matrix::Identity(c.rows(), c.cols());
  return (0.5 * (c + c.transpose())).eval();
}

// Independent reference: direct definition with an explicit exclusion test.
inline Matrix naive_cord(const Matrix& rho) {
  const auto d = rho.rows();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      double m = 0.0;
      for (Eigen::Index l = 0; l < d; ++l) {
        if (l == i || l == j) continue;
        m = std::max(m, std::abs(rho(i, l) - rho(j, l)));
      }
      out(i, j) = m;
    }
  return out;
}

// Sorted sample whose order statistics Y(p), p < n, sit exactly on the
// quantiles of P(Y > t) = 2 exp(-(t / L)^alpha) at level p / n.
inline std::vector<double> exact_quantiles(std::size_t n, double alpha, double ell) {
  std::vector<double> y(n);
  const double nn = static_cast<double>(n);
  for (std::size_t p = 1; p < n; ++p)
    y[p - 1] = ell * std::pow(std::log(2.0 * nn / (nn - static_cast<double>(p))), 1.0 / alpha);
  y[n - 1] = y[n - 2] + 1.0;
  return y;
}

// Rand-index pieces by enumerating every pair directly, kept as integers so
// (Index - Expected) / (Max - Expected) reduces to one exact division.
inline double brute_ari(const Partition& p, const Partition& q) {
  const std::size_t d = p.size();
  long long both = 0, in_p = 0, in_q = 0, pairs = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const bool a = p.label(i) == p.label(j);
      const bool b = q.label(i) == q.label(j);
      both += a && b;
      in_p += a;
      in_q += b;
      pairs += 1;
    }
  // Multiply through by 2 * pairs.
  const long long num = 2 * pairs * both - 2 * in_p * in_q;
  const long long den = pairs * (in_p + in_q) - 2 * in_p * in_q;
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline Partition random_partition(std::size_t d, Rng& rng) {
  const std::size_t k = 1 + rng.below(d);
  std::vector<std::size_t> labels(d);
  for (auto& l : labels) l = rng.below(k);
  return Partition(labels);
}

// Long-only minimum variance by enumerating supports: on each support solve
// the equality-constrained problem in closed form and keep feasible points.
inline double support_enumeration_min_variance(const Matrix& s, Vector* best_w = nullptr) {
  const auto d = s.rows();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < d; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = s(idx[a], idx[b]);
    const Vector x = sub.ldlt().solve(Vector::Ones(m));
    if (!x.allFinite() || x.sum() <= 0.0) continue;
    const Vector ws = x / x.sum();
    if (ws.minCoeff() < -1e-12) continue;
    Vector w = Vector::Zero(d);
    for (Eigen::Index a = 0; a < m; ++a) w(idx[a]) = ws(a);
    const double v = w.dot(s * w);
    if (v < best) {
      best = v;
      if (best_w) *best_w = w;
    }
  }
  return best;
}

}  // namespace blockfolio::testing
