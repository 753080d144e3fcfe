#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockfolio/corrcore.hpp"
#include "blockfolio/partition.hpp"

namespace blockfolio {

struct CovarianceMatrix {
  std::vector<std::string> tickers;
  Matrix values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

struct PortfolioWeights {
  std::vector<std::string> tickers;
  Vector weights;
  // Set when a ridge had to be added to a singular covariance.
  bool ridge_applied = false;
};

struct HedgedWeights {
  std::vector<std::string> tickers;
  Vector stock_weights;
  double benchmark_weight = 0.0;
  double beta = 0.0;
};

// Sample covariance of the columns (n - 1 denominator).
inline CovarianceMatrix sample_covariance(const Matrix& returns, std::vector<std::string> tickers = {}) {
  const Eigen::Index n = returns.rows();
  if (n < 2) fail(ErrorCode::too_few_rows, "covariance needs at least 2 rows");
  const Matrix centered = returns.rowwise() - returns.colwise().mean();
  CovarianceMatrix out;
  out.tickers = tickers.empty() ? default_tickers(static_cast<std::size_t>(returns.cols())) : std::move(tickers);
  out.values = (centered.transpose() * centered) / static_cast<double>(n - 1);
  out.values = (0.5 * (out.values + out.values.transpose())).eval();
  return out;
}

// Lowest-variance member of each cluster (ties to the smaller index), in label order.
inline std::vector<std::size_t> select_representatives(const Partition& p, std::span<const double> variances) {
  if (variances.size() != p.size()) fail(ErrorCode::invalid_argument, "variance count does not match partition");
  std::vector<std::size_t> out;
  out.reserve(p.num_clusters());
  for (const auto& members : p.clusters()) {
    std::size_t best = members.front();
    for (auto i : members)
      if (variances[i] < variances[best]) best = i;
    out.push_back(best);
  }
  return out;
}

inline double portfolio_variance(const Matrix& cov, const Vector& w) { return w.dot(cov * w); }

namespace detail {

inline constexpr double kKktTol = 1e-9;

// Adds ridge * I with ridge = 1e-10 * trace / d when the matrix is not
// numerically positive definite.
inline Matrix regularize(const Matrix& cov, bool& ridge_applied) {
  Eigen::LLT<Matrix> llt(cov);
  ridge_applied = false;
  if (llt.info() == Eigen::Success) {
    const Vector diag = llt.matrixLLT().diagonal();
    if (diag.minCoeff() > 1e-12 * std::sqrt(std::max(cov.diagonal().maxCoeff(), 1e-300))) return cov;
  }
  ridge_applied = true;
  const double d = static_cast<double>(cov.rows());
  const double ridge = 1e-10 * std::max(cov.trace(), 1e-300) / d;
  return cov + ridge * Matrix::Identity(cov.rows(), cov.cols());
}

// Primal active-set method for
//   min w' S w  s.t.  A w = b,  w >= 0,
// starting from a feasible w. Each iteration solves the equality-constrained
// problem on the free set; steps are cut at the first blocking bound.
inline Vector active_set_qp(const Matrix& cov, const Matrix& eq, const Vector& rhs, Vector w) {
  const Eigen::Index d = cov.rows();
  const Eigen::Index m = eq.rows();
  std::vector<bool> fixed(static_cast<std::size_t>(d), false);
  for (Eigen::Index i = 0; i < d; ++i)
    if (w(i) <= 0.0) {
      w(i) = 0.0;
      fixed[static_cast<std::size_t>(i)] = true;
    }
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  const int max_iter = static_cast<int>(std::max<Eigen::Index>(10 * d, 20));

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i)
      if (!fixed[static_cast<std::size_t>(i)]) free.push_back(i);
    const auto f = static_cast<Eigen::Index>(free.size());

    // Already stationary on the free set? Then skip the (possibly
    // ill-conditioned) solve so symmetric starting points stay exact.
    const Vector grad = 2.0 * cov * w;
    Matrix a_free(f, m);
    Vector g_free(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      a_free.row(a) = eq.col(free[a]).transpose();
      g_free(a) = grad(free[a]);
    }
    Vector nu = f > 0 ? Vector(a_free.completeOrthogonalDecomposition().solve(g_free)) : Vector::Zero(m);
    const bool stationary = f == 0 || (g_free - a_free * nu).cwiseAbs().maxCoeff() <= kKktTol * scale;

    Vector step = Vector::Zero(d);
    if (!stationary) {
      // KKT system [2 S_FF, -A_F'; A_F, 0] [w_F; nu] = [0; b].
      Matrix kkt = Matrix::Zero(f + m, f + m);
      Vector rhs_full = Vector::Zero(f + m);
      for (Eigen::Index a = 0; a < f; ++a) {
        for (Eigen::Index c = 0; c < f; ++c) kkt(a, c) = 2.0 * cov(free[a], free[c]);
        for (Eigen::Index r = 0; r < m; ++r) {
          kkt(a, f + r) = -eq(r, free[a]);
          kkt(f + r, a) = eq(r, free[a]);
        }
      }
      rhs_full.tail(m) = rhs;
      const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs_full);
      nu = sol.tail(m);
      for (Eigen::Index a = 0; a < f; ++a) step(free[a]) = sol(a) - w(free[a]);
    }

    if (step.cwiseAbs().maxCoeff() <= 1e-13) {
      // Bound multipliers eta = 2 S w - A' nu must be non-negative.
      const Vector eta = 2.0 * cov * w - eq.transpose() * nu;
      Eigen::Index worst = -1;
      double worst_val = -kKktTol * scale;
      for (Eigen::Index i = 0; i < d; ++i)
        if (fixed[static_cast<std::size_t>(i)] && eta(i) < worst_val) {
          worst_val = eta(i);
          worst = i;
        }
      if (worst < 0) return w;
      fixed[static_cast<std::size_t>(worst)] = false;
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index a = 0; a < f; ++a) {
      const Eigen::Index i = free[a];
      if (step(i) < 0.0) {
        const double ratio = -w(i) / step(i);
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
        }
      }
    }
    w += alpha * step;
    if (blocking >= 0) {
      w(blocking) = 0.0;
      fixed[static_cast<std::size_t>(blocking)] = true;
    }
    for (Eigen::Index i = 0; i < d; ++i)
      if (fixed[static_cast<std::size_t>(i)]) w(i) = 0.0;
  }
  fail(ErrorCode::solver_failure, "active-set iteration cap reached (d=" + std::to_string(d) + ")");
}

inline void check_square(const CovarianceMatrix& cov) {
  if (cov.values.rows() == 0 || cov.values.rows() != cov.values.cols())
    fail(ErrorCode::invalid_argument, "covariance must be square and non-empty");
  if (!cov.values.allFinite()) fail(ErrorCode::invalid_argument, "covariance has non-finite entries");
}

}  // namespace detail

// Long-only minimum variance: min w'Sw s.t. sum w = 1, w >= 0.
inline PortfolioWeights min_variance_weights(const CovarianceMatrix& cov) {
  detail::check_square(cov);
  const Eigen::Index d = cov.values.rows();
  PortfolioWeights out;
  out.tickers = cov.tickers;
  const Matrix s = detail::regularize(cov.values, out.ridge_applied);
  const Matrix eq = Matrix::Ones(1, d);
  const Vector rhs = Vector::Ones(1);
  out.weights = detail::active_set_qp(s, eq, rhs, Vector::Constant(d, 1.0 / static_cast<double>(d)));
  out.weights /= out.weights.sum();
  return out;
}

// Long-only mean-variance: min w'Sw s.t. mu'w >= target, sum w = 1, w >= 0.
inline PortfolioWeights mean_variance_weights(const CovarianceMatrix& cov, const Vector& mu, double target) {
  detail::check_square(cov);
  const Eigen::Index d = cov.values.rows();
  if (mu.size() != d) fail(ErrorCode::invalid_argument, "mean vector size does not match covariance");
  Eigen::Index best_asset = 0;
  const double max_mu = mu.maxCoeff(&best_asset);
  if (target > max_mu)
    fail(ErrorCode::infeasible, "target return " + std::to_string(target) + " exceeds the largest mean " +
                                    std::to_string(max_mu));

  PortfolioWeights mv = min_variance_weights(cov);
  const double slack = mu.dot(mv.weights) - target;
  if (slack >= -1e-12 * std::max(1.0, std::abs(target))) return mv;

  // The return constraint binds. Start from the feasible blend of the
  // min-variance portfolio and the highest-mean asset that hits the target.
  const double mv_ret = mu.dot(mv.weights);
  const double theta = (target - mv_ret) / (max_mu - mv_ret);
  Vector w0 = (1.0 - theta) * mv.weights;
  w0(best_asset) += theta;

  PortfolioWeights out;
  out.tickers = cov.tickers;
  const Matrix s = detail::regularize(cov.values, out.ridge_applied);
  Matrix eq(2, d);
  eq.row(0).setOnes();
  eq.row(1) = mu.transpose();
  Vector rhs(2);
  rhs << 1.0, target;
  out.weights = detail::active_set_qp(s, eq, rhs, w0);
  out.weights = out.weights.cwiseMax(0.0);
  out.weights /= out.weights.sum();
  return out;
}

inline Vector risk_contributions(const Matrix& cov, const Vector& w) {
  const Vector sw = cov * w;
  const double sigma = std::sqrt(w.dot(sw));
  return w.cwiseProduct(sw) / sigma;
}

// Least-squares residual sum_i (w_i - sigma(w)^2 / (d (S w)_i))^2.
inline double risk_parity_residual(const Matrix& cov, const Vector& w) {
  const Vector sw = cov * w;
  const double var = w.dot(sw);
  const double d = static_cast<double>(w.size());
  double r = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double e = w(i) - var / (d * sw(i));
    r += e * e;
  }
  return r;
}

// Equal risk contributions. Solved through the strictly convex problem
//   min 0.5 y'Sy - (1/d) sum log y_i,
// whose stationarity condition y_i (S y)_i = 1/d is the equal-contribution
// condition up to scale; cyclical coordinate updates have a closed form.
inline PortfolioWeights risk_parity_weights(const CovarianceMatrix& cov) {
  detail::check_square(cov);
  const Eigen::Index d = cov.values.rows();
  const Matrix& s = cov.values;
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(s(i, i) > 0.0)) fail(ErrorCode::invalid_argument, "risk parity needs positive variances");

  const double budget = 1.0 / static_cast<double>(d);
  Vector y = Vector::Constant(d, 1.0 / std::sqrt(s.sum() / static_cast<double>(d)));
  Vector sy = s * y;
  constexpr int kMaxSweeps = 100000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_rel = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double c = sy(i) - s(i, i) * y(i);
      const double yi = (-c + std::sqrt(c * c + 4.0 * s(i, i) * budget)) / (2.0 * s(i, i));
      const double delta = yi - y(i);
      if (delta != 0.0) {
        sy += s.col(i) * delta;
        y(i) = yi;
      }
      max_rel = std::max(max_rel, std::abs(delta) / yi);
    }
    if (max_rel < 1e-15) break;
  }

  PortfolioWeights out;
  out.tickers = cov.tickers;
  out.weights = y / y.sum();
  if (!out.weights.allFinite() || out.weights.minCoeff() <= 0.0)
    fail(ErrorCode::solver_failure, "risk parity iteration produced invalid weights");
  const double residual = risk_parity_residual(s, out.weights);
  if (!(residual <= 1e-8)) fail(ErrorCode::solver_failure, "risk parity residual " + std::to_string(residual));
  return out;
}

// Sample covariance over sample variance.
inline double estimate_beta(std::span<const double> asset, std::span<const double> market) {
  const std::size_t n = asset.size();
  if (n != market.size() || n < 2) fail(ErrorCode::invalid_argument, "beta needs two equal series of length >= 2");
  double ma = 0.0, mm = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    ma += asset[t];
    mm += market[t];
  }
  ma /= static_cast<double>(n);
  mm /= static_cast<double>(n);
  double cov = 0.0, var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    cov += (asset[t] - ma) * (market[t] - mm);
    var += (market[t] - mm) * (market[t] - mm);
  }
  if (!(var > 0.0)) fail(ErrorCode::zero_market_variance, "market series has zero variance");
  return cov / var;
}

// Shorts the benchmark by the portfolio beta and rescales by 1 + beta so the
// total weight stays 1 and the benchmark exposure is zero.
inline HedgedWeights beta_hedge(const PortfolioWeights& w, std::span<const double> betas) {
  if (betas.size() != static_cast<std::size_t>(w.weights.size()))
    fail(ErrorCode::invalid_argument, "beta count does not match weights");
  double beta = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) beta += w.weights(static_cast<Eigen::Index>(i)) * betas[i];
  if (beta < 0.0) fail(ErrorCode::negative_beta, "portfolio beta " + std::to_string(beta) + " is negative");
  if (1.0 + beta <= 1e-6) fail(ErrorCode::degenerate_beta, "1 + beta is not positive");
  HedgedWeights out;
  out.tickers = w.tickers;
  out.beta = beta;
  out.stock_weights = w.weights / (1.0 + beta);
  out.benchmark_weight = -beta / (1.0 + beta);
  return out;
}

}  // namespace blockfolio
