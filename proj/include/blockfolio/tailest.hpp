#pragma once

// Heavy-tail parameters (alpha, L) of the whitened standardized returns.
//
// Each whitened coordinate |(rho^{-1/2} X*)_r| is matched to the boundary law
// P(Y > t) = 2 exp(-(t / L)^alpha), whose quantile function satisfies
//   log q(p) = (1 / alpha) log log(2 / (1 - p)) + log L.
// Regressing the k largest order statistics (excluding the maximum) on
// log log(2n / j) gives slope 1 / alpha and intercept log L per coordinate.
// The panel-level estimate is the smallest alpha and the largest L.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "blockfolio/corrcore.hpp"

namespace blockfolio {

inline constexpr double kMaxAlpha = 2.0;
inline constexpr double kMinAlpha = 0.1;

struct TailParams {
  double alpha = kMaxAlpha;
  double ell = 1.0;
  // Minimum coordinate alpha before clamping to [kMinAlpha, kMaxAlpha].
  double raw_alpha = kMaxAlpha;
  // Set when raw_alpha fell below kMinAlpha.
  bool floored = false;
};

struct TailFitConfig {
  std::size_t k = 0;

  // floor(n * frac), kept inside [2, n - 1].
  static TailFitConfig from_fraction(std::size_t n, double frac) {
    const auto raw = static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac));
    const std::size_t hi = n > 1 ? n - 1 : 1;
    return TailFitConfig{std::clamp<std::size_t>(raw, 2, std::max<std::size_t>(2, hi))};
  }
};

struct CoordinateFit {
  double alpha;
  double ell;
};

inline Matrix whiten_abs(const StandardizedPanel& std_panel, const CorrelationMatrix& corr,
                         double eig_floor = kDefaultEigFloor) {
  if (std_panel.values.cols() != corr.values.rows())
    fail(ErrorCode::invalid_argument, "panel and correlation dimensions differ");
  const Matrix m = inv_sqrt(corr, eig_floor);
  // Row x of X* maps to M x; M is symmetric so the whole panel maps to X* M.
  return (std_panel.values * m).cwiseAbs();
}

// `sorted` must be ascending. Uses Y(n-j), j = 1..k (1-based order statistics).
inline CoordinateFit fit_tail_coordinate(std::span<const double> sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k < 2 || n < k + 1)
    fail(ErrorCode::invalid_argument,
         "tail fit needs 2 <= k <= n - 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");

  std::vector<double> xs(k), ys(k);
  for (std::size_t j = 1; j <= k; ++j) {
    const double y = sorted[n - 1 - j];
    if (!(y > 0.0)) fail(ErrorCode::degenerate_fit, "non-positive tail observation");
    xs[j - 1] = std::log(std::log(2.0 * static_cast<double>(n) / static_cast<double>(j)));
    ys[j - 1] = std::log(y);
  }
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  if (*ymin == *ymax) fail(ErrorCode::degenerate_fit, "tail observations are all equal");

  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(k);
  ybar /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) fail(ErrorCode::degenerate_fit, "non-positive regression slope");
  const double intercept = ybar - slope * xbar;
  return {1.0 / slope, std::exp(intercept)};
}

inline TailParams aggregate_tail(std::span<const CoordinateFit> fits) {
  if (fits.empty()) fail(ErrorCode::invalid_argument, "no coordinates to aggregate");
  TailParams out;
  out.raw_alpha = fits.front().alpha;
  out.ell = fits.front().ell;
  for (const auto& f : fits) {
    out.raw_alpha = std::min(out.raw_alpha, f.alpha);
    out.ell = std::max(out.ell, f.ell);
  }
  out.floored = out.raw_alpha < kMinAlpha;
  out.alpha = std::clamp(out.raw_alpha, kMinAlpha, kMaxAlpha);
  return out;
}

inline TailParams estimate_tail(const StandardizedPanel& std_panel, const CorrelationMatrix& corr,
                                TailFitConfig cfg, double eig_floor = kDefaultEigFloor) {
  const Matrix y = whiten_abs(std_panel, corr, eig_floor);
  const auto d = static_cast<std::size_t>(y.cols());
  const auto n = static_cast<Eigen::Index>(y.rows());
  std::vector<CoordinateFit> fits(d);
  parallel_for(0, d, [&](std::size_t r) {
    std::vector<double> col(y.col(static_cast<Eigen::Index>(r)).data(),
                            y.col(static_cast<Eigen::Index>(r)).data() + n);
    std::stable_sort(col.begin(), col.end());
    try {
      fits[r] = fit_tail_coordinate(col, cfg.k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_fit) throw;
      fail(ErrorCode::degenerate_fit, "coordinate " + std::to_string(r) + ": " + e.what());
    }
  });
  return aggregate_tail(fits);
}

}  // namespace blockfolio
