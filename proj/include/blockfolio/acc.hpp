#pragma once

// Asset Clustering through Correlation.
//
// PARTITION groups assets greedily around the closest remaining pair under a
// dissimilarity threshold. ACC feeds it the CORD matrix, derives the search
// range for the threshold from the estimated tail parameters, and keeps the
// grid point with the highest average intra-cluster correlation among those
// whose cluster count lies in a user range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "blockfolio/corrcore.hpp"
#include "blockfolio/partition.hpp"
#include "blockfolio/tailest.hpp"

namespace blockfolio {

struct AccConfig {
  double a = 0.1;
  double b = 10.0;
  std::size_t n_grids = 100;
  std::size_t k_min = 15;
  std::size_t k_max = 25;
  double epsilon_cap = 2.0;
  double k_frac = 0.25;
  double eig_floor = kDefaultEigFloor;

  void validate() const {
    if (!(a > 0.0 && a < b)) fail(ErrorCode::invalid_argument, "need 0 < a < b");
    if (n_grids < 2) fail(ErrorCode::invalid_argument, "n_grids must be >= 2");
    if (k_min < 1 || k_min > k_max) fail(ErrorCode::invalid_argument, "need 1 <= K_min <= K_max");
    if (!(epsilon_cap > 0.0)) fail(ErrorCode::invalid_argument, "epsilon_cap must be positive");
    if (!(k_frac > 0.0 && k_frac < 1.0)) fail(ErrorCode::invalid_argument, "k_frac must lie in (0, 1)");
    if (!(eig_floor > 0.0)) fail(ErrorCode::invalid_argument, "eig_floor must be positive");
  }
};

enum class RangeRegime {
  sqrt_log_d_over_n,  // n above the crossover
  log_d_pow_over_n,   // n at or below the crossover
};

struct ThresholdRange {
  double lo = 0.0;
  double hi = 0.0;
  RangeRegime regime = RangeRegime::sqrt_log_d_over_n;
};

// Dissimilarity pairs (i < j) sorted by (D(i, j), i, j). Building this once
// lets every PARTITION call on the same matrix run in O(d^2).
class SortedPairs {
 public:
  struct Entry {
    double value;
    std::size_t i;
    std::size_t j;
  };

  explicit SortedPairs(const DissimilarityMatrix& dis) : d_(dis.size()) {
    entries_.reserve(d_ * (d_ - (d_ > 0 ? 1 : 0)) / 2);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i + 1; j < d_; ++j)
        entries_.push_back({dis.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), i, j});
    std::sort(entries_.begin(), entries_.end(), [](const Entry& x, const Entry& y) {
      return std::tie(x.value, x.i, x.j) < std::tie(y.value, y.i, y.j);
    });
  }

  std::size_t dimension() const { return d_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::size_t d_;
  std::vector<Entry> entries_;
};

inline Partition partition(const DissimilarityMatrix& dis, const SortedPairs& pairs, double epsilon) {
  if (!(epsilon >= 0.0)) fail(ErrorCode::invalid_argument, "epsilon must be non-negative");
  const std::size_t d = dis.size();
  if (pairs.dimension() != d) fail(ErrorCode::invalid_argument, "pair list does not match matrix");
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> labels(d, unset);
  std::size_t remaining = d;
  std::size_t next_label = 0;
  std::size_t cursor = 0;
  const auto& entries = pairs.entries();

  while (remaining > 0) {
    if (remaining == 1) {
      for (auto& l : labels)
        if (l == unset) l = next_label++;
      break;
    }
    while (labels[entries[cursor].i] != unset || labels[entries[cursor].j] != unset) ++cursor;
    const auto& best = entries[cursor];
    if (best.value > epsilon) {
      labels[best.i] = next_label++;
      --remaining;
      continue;
    }
    const auto row_i = dis.values.col(static_cast<Eigen::Index>(best.i));
    const auto row_j = dis.values.col(static_cast<Eigen::Index>(best.j));
    for (std::size_t k = 0; k < d; ++k) {
      if (labels[k] != unset) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      if (std::min(row_i(kk), row_j(kk)) <= epsilon || k == best.i || k == best.j) {
        labels[k] = next_label;
        --remaining;
      }
    }
    ++next_label;
  }
  return Partition(std::move(labels));
}

inline Partition partition(const DissimilarityMatrix& dis, double epsilon) {
  if (dis.size() == 0) return Partition();
  return partition(dis, SortedPairs(dis), epsilon);
}

// (log d)^{4 / alpha - 1}: above this n the sqrt(log d / n) term dominates.
inline double crossover_n(std::size_t d, double alpha) {
  if (d < 2) fail(ErrorCode::invalid_argument, "crossover needs d >= 2");
  if (!(alpha > 0.0 && alpha <= kMaxAlpha)) fail(ErrorCode::invalid_argument, "alpha must lie in (0, 2]");
  return std::pow(std::log(static_cast<double>(d)), 4.0 / alpha - 1.0);
}

inline ThresholdRange rule1_range(std::size_t n, std::size_t d, const TailParams& tail, const AccConfig& cfg) {
  if (n < 2 || d < 2) fail(ErrorCode::invalid_argument, "threshold range needs n >= 2 and d >= 2");
  const double log_d = std::log(static_cast<double>(d));
  const double nn = static_cast<double>(n);
  const double l2 = tail.ell * tail.ell;
  ThresholdRange out;
  double scale = 0.0;
  if (nn > crossover_n(d, tail.alpha)) {
    out.regime = RangeRegime::sqrt_log_d_over_n;
    scale = l2 * std::sqrt(log_d / nn);
  } else {
    out.regime = RangeRegime::log_d_pow_over_n;
    scale = l2 * std::pow(log_d, 2.0 / tail.alpha) / nn;
  }
  out.hi = std::min(cfg.b * scale, cfg.epsilon_cap);
  out.lo = std::min(cfg.a * scale, out.hi);
  return out;
}

// Mean correlation over same-cluster pairs; nullopt when every cluster is a singleton.
inline std::optional<double> intra_cluster_corr(const Partition& p, const CorrelationMatrix& corr) {
  if (p.size() != corr.size()) fail(ErrorCode::invalid_argument, "partition and correlation sizes differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& members : p.clusters()) {
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        sum += corr.values(static_cast<Eigen::Index>(members[x]), static_cast<Eigen::Index>(members[y]));
        ++count;
      }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

struct GridPoint {
  double epsilon;
  std::size_t clusters;
  std::optional<double> intra_corr;  // empty when K is outside the range or undefined
};

struct ThresholdSelection {
  double epsilon = 0.0;
  Partition partition;
  double intra_corr = 0.0;
  std::vector<GridPoint> grid;
};

inline std::vector<double> threshold_grid(const ThresholdRange& range, std::size_t n_grids) {
  std::vector<double> out(n_grids);
  for (std::size_t g = 0; g < n_grids; ++g)
    out[g] = g + 1 == n_grids
                 ? range.hi
                 : range.lo + (range.hi - range.lo) * static_cast<double>(g) / static_cast<double>(n_grids - 1);
  return out;
}

inline ThresholdSelection select_threshold(const DissimilarityMatrix& dis, const CorrelationMatrix& corr,
                                           const ThresholdRange& range, const AccConfig& cfg) {
  if (!(range.lo >= 0.0 && range.lo <= range.hi))
    fail(ErrorCode::invalid_argument, "threshold range must satisfy 0 <= lo <= hi");
  if (cfg.n_grids < 2) fail(ErrorCode::invalid_argument, "n_grids must be >= 2");
  const SortedPairs pairs(dis);
  const auto eps = threshold_grid(range, cfg.n_grids);

  std::vector<GridPoint> grid(eps.size());
  std::vector<Partition> parts(eps.size());
  parallel_for(0, eps.size(), [&](std::size_t g) {
    parts[g] = partition(dis, pairs, eps[g]);
    const std::size_t k = parts[g].num_clusters();
    grid[g] = {eps[g], k, std::nullopt};
    if (k >= cfg.k_min && k <= cfg.k_max) grid[g].intra_corr = intra_cluster_corr(parts[g], corr);
  });

  // Ascending scan with strict improvement keeps the smallest epsilon on ties.
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!grid[g].intra_corr) continue;
    if (!best || *grid[g].intra_corr > *grid[*best].intra_corr) best = g;
  }
  if (!best)
    fail(ErrorCode::no_feasible_threshold,
         "no threshold in [" + std::to_string(range.lo) + ", " + std::to_string(range.hi) +
             "] gives a cluster count in [" + std::to_string(cfg.k_min) + ", " + std::to_string(cfg.k_max) +
             "] with a defined intra-cluster correlation");
  ThresholdSelection out;
  out.epsilon = grid[*best].epsilon;
  out.intra_corr = *grid[*best].intra_corr;
  out.partition = std::move(parts[*best]);
  out.grid = std::move(grid);
  return out;
}

struct AccResult {
  Partition partition;
  TailParams tail;
  ThresholdRange range;
  double epsilon = 0.0;
  double intra_corr = 0.0;
  std::vector<std::string> tickers;
  std::vector<GridPoint> grid;
};

inline AccResult acc(const StandardizedPanel& std_panel, const AccConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(std_panel.values.rows());
  const auto d = static_cast<std::size_t>(std_panel.values.cols());
  if (d < 2) fail(ErrorCode::invalid_argument, "ACC needs at least 2 assets");
  const CorrelationMatrix corr = sample_correlation(std_panel);
  const DissimilarityMatrix dis = cord_matrix(corr);
  AccResult out;
  out.tail = estimate_tail(std_panel, corr, TailFitConfig::from_fraction(n, cfg.k_frac), cfg.eig_floor);
  out.range = rule1_range(n, d, out.tail, cfg);
  auto sel = select_threshold(dis, corr, out.range, cfg);
  out.partition = std::move(sel.partition);
  out.epsilon = sel.epsilon;
  out.intra_corr = sel.intra_corr;
  out.grid = std::move(sel.grid);
  out.tickers = std_panel.tickers;
  return out;
}

inline AccResult acc(const ReturnsPanel& panel, const AccConfig& cfg) { return acc(standardize(panel), cfg); }

}  // namespace blockfolio
