#pragma once

// Comparison clusterers on the correlation distance sqrt(2 (1 - rho)):
// single-linkage agglomeration and k-medoids with farthest-point seeding and
// best-improvement swaps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "blockfolio/corrcore.hpp"
#include "blockfolio/partition.hpp"
#include "blockfolio/rng.hpp"

namespace blockfolio {

inline constexpr std::size_t kDefaultBaselineClusters = 20;

inline DissimilarityMatrix corr_distance(const CorrelationMatrix& corr) {
  DissimilarityMatrix out;
  out.tickers = corr.tickers;
  out.values = (2.0 * (1.0 - corr.values.array())).max(0.0).sqrt().matrix();
  out.values.diagonal().setZero();
  return out;
}

struct Merge {
  std::size_t kept;    // surviving cluster slot (smaller index)
  std::size_t merged;  // absorbed cluster slot
  double distance;
};

// Full agglomeration down to one cluster. Clusters are named by slot; merging
// slots a < b keeps a, and distances update as min(d(a, c), d(b, c)).
inline std::vector<Merge> single_linkage_merges(const DissimilarityMatrix& dis) {
  const std::size_t d = dis.size();
  Matrix dist = dis.values;
  std::vector<bool> active(d, true);
  std::vector<Merge> merges;
  merges.reserve(d > 0 ? d - 1 : 0);
  for (std::size_t step = 1; step < d; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < d; ++j) {
        if (!active[j]) continue;
        const double v = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    merges.push_back({bi, bj, best});
    active[bj] = false;
    for (std::size_t c = 0; c < d; ++c) {
      if (!active[c] || c == bi) continue;
      const auto ci = static_cast<Eigen::Index>(c);
      const double v = std::min(dist(static_cast<Eigen::Index>(bi), ci), dist(static_cast<Eigen::Index>(bj), ci));
      dist(static_cast<Eigen::Index>(bi), ci) = v;
      dist(ci, static_cast<Eigen::Index>(bi)) = v;
    }
  }
  return merges;
}

inline Partition single_linkage(const DissimilarityMatrix& dis, std::size_t k) {
  const std::size_t d = dis.size();
  if (k < 1 || k > d) fail(ErrorCode::invalid_argument, "single linkage needs 1 <= k <= d");
  const auto merges = single_linkage_merges(dis);
  std::vector<std::size_t> slot(d);
  for (std::size_t i = 0; i < d; ++i) slot[i] = i;
  for (std::size_t m = 0; m < d - k; ++m)
    for (auto& s : slot)
      if (s == merges[m].merged) s = merges[m].kept;
  return Partition(std::move(slot));
}

struct KMedoidsResult {
  Partition partition;
  std::vector<std::size_t> medoids;  // ascending
  double cost = 0.0;
  double initial_cost = 0.0;
  std::size_t swaps = 0;
};

namespace detail {
// Sum over non-medoids of the distance to the nearest medoid.
inline double medoid_cost(const Matrix& dist, const std::vector<bool>& is_medoid,
                          const std::vector<std::size_t>& medoids) {
  double total = 0.0;
  for (std::size_t j = 0; j < is_medoid.size(); ++j) {
    if (is_medoid[j]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (auto m : medoids)
      best = std::min(best, dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)));
    total += best;
  }
  return total;
}
}  // namespace detail

inline KMedoidsResult kmedoids(const DissimilarityMatrix& dis, std::size_t k, std::uint64_t seed) {
  const std::size_t d = dis.size();
  if (k < 1 || k > d) fail(ErrorCode::invalid_argument, "k-medoids needs 1 <= k <= d");
  const Matrix& dist = dis.values;
  auto at = [&](std::size_t i, std::size_t j) {
    return dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  // Random first medoid, then repeatedly the point farthest from its nearest medoid.
  Rng rng(seed);
  std::vector<std::size_t> medoids{static_cast<std::size_t>(rng.below(d))};
  std::vector<bool> is_medoid(d, false);
  is_medoid[medoids[0]] = true;
  std::vector<double> nearest(d);
  for (std::size_t j = 0; j < d; ++j) nearest[j] = at(j, medoids[0]);
  while (medoids.size() < k) {
    std::size_t pick = d;
    for (std::size_t j = 0; j < d; ++j) {
      if (is_medoid[j]) continue;
      if (pick == d || nearest[j] > nearest[pick]) pick = j;
    }
    medoids.push_back(pick);
    is_medoid[pick] = true;
    for (std::size_t j = 0; j < d; ++j) nearest[j] = std::min(nearest[j], at(j, pick));
  }

  KMedoidsResult out;
  double cost = detail::medoid_cost(dist, is_medoid, medoids);
  out.initial_cost = cost;

  std::vector<double> first(d), second(d);
  std::vector<std::size_t> owner(d);
  for (;;) {
    std::sort(medoids.begin(), medoids.end());
    for (std::size_t j = 0; j < d; ++j) {
      first[j] = second[j] = std::numeric_limits<double>::infinity();
      owner[j] = d;
      for (auto m : medoids) {
        const double v = at(j, m);
        if (v < first[j]) {
          second[j] = first[j];
          first[j] = v;
          owner[j] = m;
        } else if (v < second[j]) {
          second[j] = v;
        }
      }
    }
    // Scan (medoid ascending, candidate ascending); first strict best wins.
    double best_cost = cost;
    std::size_t best_slot = k, best_candidate = d;
    for (std::size_t slot = 0; slot < k; ++slot) {
      const std::size_t h = medoids[slot];
      for (std::size_t cand = 0; cand < d; ++cand) {
        if (is_medoid[cand]) continue;
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          if (j == cand || (is_medoid[j] && j != h)) continue;
          // Nearest remaining medoid distance, then compare with the candidate.
          const double keep = owner[j] == h ? second[j] : first[j];
          total += std::min(keep, at(j, cand));
        }
        if (total < best_cost) {
          best_cost = total;
          best_slot = slot;
          best_candidate = cand;
        }
      }
    }
    if (best_slot == k) break;
    is_medoid[medoids[best_slot]] = false;
    is_medoid[best_candidate] = true;
    medoids[best_slot] = best_candidate;
    cost = best_cost;
    ++out.swaps;
  }
  std::sort(medoids.begin(), medoids.end());

  std::vector<std::size_t> labels(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (is_medoid[j]) {
      labels[j] = j;
      continue;
    }
    std::size_t best = medoids.front();
    for (auto m : medoids)
      if (at(j, m) < at(j, best)) best = m;
    labels[j] = best;
  }
  out.partition = Partition(std::move(labels));
  out.medoids = std::move(medoids);
  out.cost = detail::medoid_cost(dist, is_medoid, out.medoids);
  return out;
}

}  // namespace blockfolio
