#pragma once

// Numeric kernels shared by every clustering and allocation path:
// column standardization, sample correlation, the CORD dissimilarity and the
// symmetric inverse square root used for whitening.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "blockfolio/date.hpp"
#include "blockfolio/error.hpp"
#include "blockfolio/parallel.hpp"

namespace blockfolio {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n periods (rows) by d assets (columns) of simple returns.
struct ReturnsPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix values;

  std::size_t periods() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t assets() const { return static_cast<std::size_t>(values.cols()); }
};

// Same shape as the panel it came from; every column has mean 0 and sample
// standard deviation 1.
struct StandardizedPanel {
  std::vector<std::string> tickers;
  Matrix values;
};

struct CorrelationMatrix {
  std::vector<std::string> tickers;
  Matrix values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

struct DissimilarityMatrix {
  std::vector<std::string> tickers;
  Matrix values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

inline std::vector<std::string> default_tickers(std::size_t d) {
  std::vector<std::string> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = "A" + std::to_string(i);
  return out;
}

inline void validate(const ReturnsPanel& panel) {
  const auto n = panel.periods();
  const auto d = panel.assets();
  if (n < 2) fail(ErrorCode::too_few_rows, "panel has " + std::to_string(n) + " rows, need >= 2");
  if (d < 1) fail(ErrorCode::invalid_argument, "panel has no assets");
  if (!panel.tickers.empty() && panel.tickers.size() != d)
    fail(ErrorCode::invalid_argument, "ticker count does not match column count");
  if (!panel.dates.empty()) {
    if (panel.dates.size() != n)
      fail(ErrorCode::invalid_argument, "date count does not match row count");
    for (std::size_t t = 1; t < n; ++t)
      if (!(panel.dates[t - 1] < panel.dates[t]))
        fail(ErrorCode::non_monotone_dates, "dates not strictly increasing at row " + std::to_string(t));
  }
  if (!panel.values.allFinite())
    fail(ErrorCode::invalid_argument, "panel contains missing or non-finite entries");
}

// Column-wise (x - mean) / sd with the n-1 denominator.
inline StandardizedPanel standardize(const Matrix& values, const std::vector<std::string>& tickers) {
  const Eigen::Index n = values.rows();
  const Eigen::Index d = values.cols();
  if (n < 2) fail(ErrorCode::too_few_rows, "need at least 2 rows, got " + std::to_string(n));

  StandardizedPanel out;
  out.tickers = tickers.empty() ? default_tickers(static_cast<std::size_t>(d)) : tickers;
  out.values.resize(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto col = values.col(j);
    const double mean = col.mean();
    double ss = 0.0;
    double scale = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double dev = col(t) - mean;
      ss += dev * dev;
      scale = std::max(scale, std::abs(col(t)));
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 1e-14 * std::max(1.0, scale)))
      fail(ErrorCode::constant_column, out.tickers[static_cast<std::size_t>(j)]);
    for (Eigen::Index t = 0; t < n; ++t) out.values(t, j) = (col(t) - mean) / sd;
  }
  return out;
}

inline StandardizedPanel standardize(const ReturnsPanel& panel) {
  validate(panel);
  return standardize(panel.values, panel.tickers);
}

namespace detail {
// Plain left-to-right dot product. Identical columns give bit-identical
// results regardless of their position in memory.
inline double dot(const double* a, const double* b, Eigen::Index n) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}
}  // namespace detail

// rho = X*' X* / (n - 1), filled symmetrically and clamped to [-1, 1].
inline CorrelationMatrix sample_correlation(const StandardizedPanel& std_panel) {
  const Eigen::Index n = std_panel.values.rows();
  const Eigen::Index d = std_panel.values.cols();
  if (n < 2) fail(ErrorCode::too_few_rows, "need at least 2 rows, got " + std::to_string(n));

  CorrelationMatrix out;
  out.tickers = std_panel.tickers;
  out.values.resize(d, d);
  const double inv = 1.0 / static_cast<double>(n - 1);
  const double* base = std_panel.values.data();
  parallel_for(0, static_cast<std::size_t>(d), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    const double* ci = base + i * n;
    for (Eigen::Index l = i; l < d; ++l) {
      const double r = std::clamp(detail::dot(ci, base + l * n, n) * inv, -1.0, 1.0);
      out.values(i, l) = r;
    }
  });
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index l = 0; l < i; ++l) out.values(i, l) = out.values(l, i);
  return out;
}

// CORD(i, j) = max over l not in {i, j} of |rho_il - rho_jl|. With d = 2 the
// maximum runs over an empty set and is taken to be 0.
inline DissimilarityMatrix cord_matrix(const CorrelationMatrix& corr) {
  const Eigen::Index d = corr.values.rows();
  if (d < 2 || corr.values.cols() != d)
    fail(ErrorCode::invalid_argument, "CORD needs a square matrix with d >= 2");

  DissimilarityMatrix out;
  out.tickers = corr.tickers;
  out.values = Matrix::Zero(d, d);
  // Columns of a symmetric matrix are its rows; column access is contiguous.
  const double* base = corr.values.data();
  parallel_for(0, static_cast<std::size_t>(d), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    const double* ci = base + i * d;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double* cj = base + j * d;
      double m = 0.0;
      for (Eigen::Index l = 0; l < i; ++l) m = std::max(m, std::abs(ci[l] - cj[l]));
      for (Eigen::Index l = i + 1; l < j; ++l) m = std::max(m, std::abs(ci[l] - cj[l]));
      for (Eigen::Index l = j + 1; l < d; ++l) m = std::max(m, std::abs(ci[l] - cj[l]));
      out.values(i, j) = m;
    }
  });
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) out.values(i, j) = out.values(j, i);
  return out;
}

inline constexpr double kDefaultEigFloor = 1e-10;

// Q diag(max(lambda, floor))^{-1/2} Q' for symmetric input.
inline Matrix inv_sqrt(const Matrix& sym, double eig_floor = kDefaultEigFloor) {
  if (sym.rows() != sym.cols()) fail(ErrorCode::invalid_argument, "inv_sqrt needs a square matrix");
  if (!(eig_floor > 0.0)) fail(ErrorCode::invalid_argument, "eig_floor must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) fail(ErrorCode::eigen_failure, "eigendecomposition did not converge");
  const Vector scale = es.eigenvalues().cwiseMax(eig_floor).cwiseSqrt().cwiseInverse();
  Matrix out = es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline Matrix inv_sqrt(const CorrelationMatrix& corr, double eig_floor = kDefaultEigFloor) {
  return inv_sqrt(corr.values, eig_floor);
}

}  // namespace blockfolio
