#pragma once

// Correlation blockmodel simulator and recovery diagnostics.
//
// Standardized returns follow X*_i = F_{z(i)} + U_i, where the cluster factors
// F have covariance Sigma_F and U_i is independent noise with variance
// 1 - sigma_{z(i)}^2, so rho = Z Sigma_F Z' + Sigma_U.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "blockfolio/acc.hpp"
#include "blockfolio/corrcore.hpp"
#include "blockfolio/partition.hpp"
#include "blockfolio/rng.hpp"

namespace blockfolio {

enum class Law { gaussian, student_t, laplace };

struct Distribution {
  Law law = Law::gaussian;
  double nu = 0.0;  // degrees of freedom for student_t

  std::string name() const {
    switch (law) {
      case Law::gaussian: return "gaussian";
      case Law::student_t: return "student_t";
      case Law::laplace: return "laplace";
    }
    return "unknown";
  }

  // t with nu <= 4 has no fourth moment and is outside the sub-exponential
  // regime the recovery guarantee assumes. Allowed for stress tests.
  bool violates_tail_assumption() const { return law == Law::student_t && nu <= 4.0; }

  double draw(Rng& rng) const {
    switch (law) {
      case Law::gaussian: return rng.normal();
      case Law::student_t: return rng.student_t_unit(nu);
      case Law::laplace: return rng.laplace_unit();
    }
    return 0.0;
  }
};

struct BlockmodelSpec {
  std::vector<std::size_t> assignment;  // z: asset -> factor
  Matrix sigma_f;                       // K x K factor covariance
  Distribution distribution;
  std::uint64_t seed = 0;

  std::size_t d() const { return assignment.size(); }
  std::size_t k() const { return static_cast<std::size_t>(sigma_f.rows()); }
  Vector sigma_sq() const { return sigma_f.diagonal(); }

  void validate() const {
    const auto kk = sigma_f.rows();
    if (kk < 1 || sigma_f.cols() != kk) fail(ErrorCode::invalid_spec, "Sigma_F must be square and non-empty");
    if (assignment.empty()) fail(ErrorCode::invalid_spec, "no assets");
    for (auto z : assignment)
      if (z >= k()) fail(ErrorCode::invalid_spec, "assignment label out of range");
    if (!sigma_f.allFinite()) fail(ErrorCode::invalid_spec, "Sigma_F has non-finite entries");
    if ((sigma_f - sigma_f.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      fail(ErrorCode::invalid_spec, "Sigma_F is not symmetric");
    for (Eigen::Index c = 0; c < kk; ++c)
      if (sigma_f(c, c) < 0.0 || sigma_f(c, c) > 1.0)
        fail(ErrorCode::invalid_spec, "factor variances must lie in [0, 1]");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_f, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10)
      fail(ErrorCode::invalid_spec, "Sigma_F is not positive semidefinite");
    if (distribution.law == Law::student_t && !(distribution.nu > 2.0))
      fail(ErrorCode::invalid_spec, "student_t needs nu > 2 for unit variance");
  }

  // K contiguous blocks of (nearly) equal size; Sigma_F has `within` on the
  // diagonal and `cross` elsewhere.
  static BlockmodelSpec equal_blocks(std::size_t d, std::size_t k, double within, double cross,
                                     Distribution dist = {}, std::uint64_t seed = 0) {
    BlockmodelSpec s;
    s.assignment.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.assignment[i] = i * k / d;
    s.sigma_f = Matrix::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), cross);
    s.sigma_f.diagonal().setConstant(within);
    s.distribution = dist;
    s.seed = seed;
    return s;
  }
};

inline CorrelationMatrix implied_correlation(const BlockmodelSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.d());
  CorrelationMatrix out;
  out.tickers = default_tickers(spec.d());
  out.values.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out.values(i, j) = i == j ? 1.0
                                : spec.sigma_f(static_cast<Eigen::Index>(spec.assignment[static_cast<std::size_t>(i)]),
                                               static_cast<Eigen::Index>(spec.assignment[static_cast<std::size_t>(j)]));
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.values, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10)
    fail(ErrorCode::invalid_spec, "implied correlation is not positive semidefinite");
  return out;
}

// Symmetric square root of a PSD matrix; tiny negative eigenvalues clip to 0.
inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) fail(ErrorCode::eigen_failure, "eigendecomposition did not converge");
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// n i.i.d. rows of standardized-scale returns. Draw order per row: K factor
// innovations, then d noise innovations.
inline ReturnsPanel sample_returns(const BlockmodelSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 2) fail(ErrorCode::too_few_rows, "need n >= 2");
  const auto d = static_cast<Eigen::Index>(spec.d());
  const auto kk = static_cast<Eigen::Index>(spec.k());
  const Matrix mix = psd_sqrt(spec.sigma_f);
  Vector noise_sd(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double s2 = spec.sigma_f(static_cast<Eigen::Index>(spec.assignment[static_cast<std::size_t>(i)]),
                                   static_cast<Eigen::Index>(spec.assignment[static_cast<std::size_t>(i)]));
    noise_sd(i) = std::sqrt(std::max(0.0, 1.0 - s2));
  }

  Rng rng(spec.seed);
  ReturnsPanel out;
  out.tickers = default_tickers(spec.d());
  out.dates = business_days(Date(2000, 1, 3), n);
  out.values.resize(static_cast<Eigen::Index>(n), d);
  Vector g(kk), f(kk);
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(n); ++t) {
    for (Eigen::Index c = 0; c < kk; ++c) g(c) = spec.distribution.draw(rng);
    f.noalias() = mix * g;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double u = spec.distribution.draw(rng);
      out.values(t, i) = f(static_cast<Eigen::Index>(spec.assignment[static_cast<std::size_t>(i)])) + noise_sd(i) * u;
    }
  }
  return out;
}

// Groups i and j whenever CORD(i, j) <= tol. Reports NotTransitive instead of
// chaining when that relation is not an equivalence.
inline Partition coarsest_partition(const CorrelationMatrix& corr, double tol = 0.0) {
  const std::size_t d = corr.size();
  if (d == 0) return Partition();
  if (d == 1) return Partition(std::vector<std::size_t>{0});
  const DissimilarityMatrix cord = cord_matrix(corr);
  std::vector<std::size_t> parent(d);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (cord.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= tol) {
        const auto ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<std::size_t> labels(d);
  for (std::size_t i = 0; i < d; ++i) labels[i] = find(i);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (labels[i] == labels[j] && cord.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > tol)
        fail(ErrorCode::not_transitive, "assets " + std::to_string(i) + " and " + std::to_string(j) +
                                            " are linked only through a chain");
  return Partition(std::move(labels));
}

// Delta: smallest CORD between assets in different true clusters; +inf for K = 1.
inline double min_separation(const CorrelationMatrix& corr, const Partition& truth) {
  if (truth.size() != corr.size()) fail(ErrorCode::invalid_argument, "partition size does not match");
  double best = std::numeric_limits<double>::infinity();
  if (corr.size() < 2) return best;
  const DissimilarityMatrix cord = cord_matrix(corr);
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j)
      if (truth.label(i) != truth.label(j))
        best = std::min(best, cord.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return best;
}

// tau = max over i, j, l of |(rho_hat_il - rho_hat_jl) - (rho_il - rho_jl)|.
inline double cord_sampling_error(const CorrelationMatrix& corr_hat, const CorrelationMatrix& corr_true) {
  if (corr_hat.size() != corr_true.size()) fail(ErrorCode::invalid_argument, "dimension mismatch");
  const Matrix err = corr_hat.values - corr_true.values;
  const auto d = err.rows();
  double tau = 0.0;
  // For fixed l the max over (i, j) of |e_il - e_jl| is the column range.
  for (Eigen::Index l = 0; l < d; ++l) tau = std::max(tau, err.col(l).maxCoeff() - err.col(l).minCoeff());
  return tau;
}

// Pair-counting adjusted Rand index, evaluated as a ratio of integers so the
// only rounding is the final division.
inline double adjusted_rand(const Partition& p1, const Partition& p2) {
  if (p1.size() != p2.size()) fail(ErrorCode::invalid_argument, "partitions have different sizes");
  using Wide = __int128;
  const std::size_t d = p1.size();
  if (d < 2) return 1.0;
  const std::size_t r = p1.num_clusters(), c = p2.num_clusters();
  std::vector<std::int64_t> table(r * c, 0), rows(r, 0), cols(c, 0);
  for (std::size_t i = 0; i < d; ++i) {
    ++table[p1.label(i) * c + p2.label(i)];
    ++rows[p1.label(i)];
    ++cols[p2.label(i)];
  }
  auto choose2 = [](std::int64_t x) -> Wide { return static_cast<Wide>(x) * (x - 1) / 2; };
  Wide index = 0, a = 0, b = 0;
  for (auto v : table) index += choose2(v);
  for (auto v : rows) a += choose2(v);
  for (auto v : cols) b += choose2(v);
  const Wide total = choose2(static_cast<std::int64_t>(d));
  const Wide num = 2 * total * index - 2 * a * b;
  const Wide den = total * (a + b) - 2 * a * b;
  if (den == 0) return 1.0;  // only reachable when the partitions coincide
  return static_cast<double>(num) / static_cast<double>(den);
}

struct RecoveryResult {
  std::uint64_t seed = 0;
  bool exact = false;
  double ari = 0.0;
  double tau = 0.0;
  double delta = 0.0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  std::size_t clusters_found = 0;
  std::optional<ErrorCode> failure;  // set when ACC could not produce a partition
};

inline RecoveryResult recovery_trial(const BlockmodelSpec& spec, std::size_t n, const AccConfig& cfg) {
  const CorrelationMatrix truth_corr = implied_correlation(spec);
  const Partition truth = coarsest_partition(truth_corr, 0.0);
  RecoveryResult out;
  out.seed = spec.seed;
  out.delta = min_separation(truth_corr, truth);

  const ReturnsPanel panel = sample_returns(spec, n);
  Partition found = Partition::singletons(spec.d());
  out.tau = std::numeric_limits<double>::infinity();
  try {
    const StandardizedPanel std_panel = standardize(panel);
    out.tau = cord_sampling_error(sample_correlation(std_panel), truth_corr);
    AccResult res = acc(std_panel, cfg);
    found = std::move(res.partition);
    out.epsilon = res.epsilon;
    out.clusters_found = found.num_clusters();
  } catch (const Error& e) {
    out.failure = e.code();
  }
  out.exact = !out.failure && found == truth;
  out.ari = adjusted_rand(found, truth);
  return out;
}

}  // namespace blockfolio
