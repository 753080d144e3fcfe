#pragma once

// Scheduled re-clustering and rebalancing over a price panel, with
// buy-and-hold accounting between rebalances, performance metrics, and
// rolling-window strategy comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockfolio/acc.hpp"
#include "blockfolio/alloc.hpp"
#include "blockfolio/baselines.hpp"
#include "blockfolio/parallel.hpp"
#include "blockfolio/prices.hpp"

namespace blockfolio {

inline constexpr double kTradingDays = 252.0;

enum class Frequency { annual, semiannual, quarterly };

inline int months_per_period(Frequency f) {
  switch (f) {
    case Frequency::annual: return 12;
    case Frequency::semiannual: return 6;
    case Frequency::quarterly: return 3;
  }
  return 12;
}

inline std::string_view to_string(Frequency f) {
  switch (f) {
    case Frequency::annual: return "annual";
    case Frequency::semiannual: return "semiannual";
    case Frequency::quarterly: return "quarterly";
  }
  return "annual";
}

inline std::optional<Frequency> parse_frequency(std::string_view s) {
  if (s == "annual") return Frequency::annual;
  if (s == "semiannual") return Frequency::semiannual;
  if (s == "quarterly") return Frequency::quarterly;
  return std::nullopt;
}

// Indices of the first trading day of every scheduled month: the anchor
// month plus multiples of 12, 6 or 3 months. Row 0 counts as a month start.
inline std::vector<std::size_t> rebalance_schedule(const std::vector<Date>& dates, Frequency f,
                                                   unsigned anchor_month = 2) {
  if (anchor_month < 1 || anchor_month > 12) fail(ErrorCode::invalid_argument, "anchor month must be in 1..12");
  const int step = months_per_period(f);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const int m = dates[i].month_index();
    if (i > 0 && dates[i - 1].month_index() == m) continue;
    const int offset = ((m - static_cast<int>(anchor_month - 1)) % step + step) % step;
    if (offset == 0) out.push_back(i);
  }
  return out;
}

struct FilterConfig {
  std::size_t min_history_days = 5 * 252;
  double max_missing_frac = 0.05;
};

// Eligible column indices (ascending) on row `as_of`.
inline std::vector<std::size_t> filter_universe(const PricePanel& panel, const ConstituencyTable* constituents,
                                                std::size_t as_of, std::size_t window, const FilterConfig& cfg = {}) {
  if (as_of >= panel.rows()) fail(ErrorCode::invalid_argument, "as-of row outside the panel");
  const Date day = panel.dates[as_of];
  const std::size_t lo = as_of + 1 >= window ? as_of + 1 - window : 0;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> first_valid(panel.cols(), panel.rows());
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (constituents && !constituents->is_member(panel.tickers[c], day)) continue;
    std::size_t first = panel.rows();
    for (std::size_t t = 0; t <= as_of; ++t)
      if (!is_missing(panel.prices(static_cast<Eigen::Index>(t), col))) {
        first = t;
        break;
      }
    if (first > as_of || as_of - first + 1 < cfg.min_history_days) continue;
    std::size_t missing = 0;
    for (std::size_t t = lo; t <= as_of; ++t) missing += is_missing(panel.prices(static_cast<Eigen::Index>(t), col));
    if (static_cast<double>(missing) > cfg.max_missing_frac * static_cast<double>(as_of - lo + 1)) continue;
    first_valid[c] = first;
    keep.push_back(c);
  }
  if (!constituents) return keep;

  // One share class per company: earliest listing (or first price) wins.
  auto listed = [&](std::size_t c) {
    const auto& e = constituents->entries.at(panel.tickers[c]);
    return e.listing_date.value_or(panel.dates[first_valid[c]]);
  };
  std::vector<std::size_t> out;
  for (auto c : keep) {
    const auto& group = constituents->entries.at(panel.tickers[c]).class_group;
    bool dominated = false;
    if (!group.empty()) {
      for (auto o : keep) {
        if (o == c || constituents->entries.at(panel.tickers[o]).class_group != group) continue;
        const Date lo_c = listed(c), lo_o = listed(o);
        if (lo_o < lo_c || (lo_o == lo_c && o < c)) {
          dominated = true;
          break;
        }
      }
    }
    if (!dominated) out.push_back(c);
  }
  return out;
}

enum class Strategy { risk_parity, min_variance, mean_variance };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::risk_parity: return "risk_parity";
    case Strategy::min_variance: return "min_variance";
    case Strategy::mean_variance: return "mean_variance";
  }
  return "risk_parity";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "risk_parity") return Strategy::risk_parity;
  if (s == "min_variance") return Strategy::min_variance;
  if (s == "mean_variance") return Strategy::mean_variance;
  return std::nullopt;
}

enum class ClusterMethod { acc, kmedoids, single_linkage, fixed_groups };

inline std::string_view to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::acc: return "acc";
    case ClusterMethod::kmedoids: return "kmedoids";
    case ClusterMethod::single_linkage: return "single_linkage";
    case ClusterMethod::fixed_groups: return "fixed_groups";
  }
  return "acc";
}

inline std::optional<ClusterMethod> parse_cluster_method(std::string_view s) {
  if (s == "acc") return ClusterMethod::acc;
  if (s == "kmedoids") return ClusterMethod::kmedoids;
  if (s == "single_linkage") return ClusterMethod::single_linkage;
  if (s == "fixed_groups") return ClusterMethod::fixed_groups;
  return std::nullopt;
}

// What a custom selector sees at a rebalance: the eligible tickers and their
// trailing window returns (one column each).
struct RebalanceContext {
  Date date;
  const std::vector<std::string>& tickers;
  const Matrix& returns;
};

// Returns indices into RebalanceContext::tickers.
using Selector = std::function<std::vector<std::size_t>(const RebalanceContext&)>;

struct BacktestConfig {
  std::size_t window = 500;
  Frequency frequency = Frequency::annual;
  unsigned anchor_month = 2;
  Strategy strategy = Strategy::risk_parity;
  bool market_neutral = false;
  double target_return = 0.10;  // annualized
  ClusterMethod method = ClusterMethod::acc;
  std::size_t k = kDefaultBaselineClusters;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> fixed_groups;  // ticker -> group name
  AccConfig acc;
  FilterConfig filter;
  double initial_capital = 1000.0;
  double risk_free = 0.0;  // annual
  std::string benchmark_name = "benchmark";
  Selector selector;  // replaces clustering and representative choice when set

  void validate() const {
    if (window < 2) fail(ErrorCode::invalid_argument, "window must be >= 2");
    if (!(initial_capital > 0.0)) fail(ErrorCode::invalid_argument, "initial capital must be positive");
    if (k < 1) fail(ErrorCode::invalid_argument, "k must be >= 1");
    if (!(filter.max_missing_frac >= 0.0 && filter.max_missing_frac <= 1.0))
      fail(ErrorCode::invalid_argument, "max missing fraction must lie in [0, 1]");
    if (method == ClusterMethod::acc && !selector) acc.validate();
  }
};

struct RebalanceRecord {
  Date date;
  std::vector<std::string> tickers;  // held positions; the benchmark is last when hedged
  Vector weights;
  std::size_t universe = 0;
  std::size_t clusters = 0;
  std::optional<double> epsilon;
  std::optional<double> beta;
  bool ridge_applied = false;
  double turnover = 0.0;  // half L1 weight change; 0 for the initial investment
};

struct PerformanceReport {
  std::size_t periods = 0;
  double ending_vami = 0.0;
  double annualized_return = 0.0;
  double max_drawdown = 0.0;
  std::optional<std::size_t> peak_index, valley_index;
  std::optional<Date> peak_date, valley_date;
  std::optional<std::size_t> recovery_days;  // valley to the first close at or above the prior peak
  std::optional<double> sharpe, sortino, calmar;
  std::optional<double> annualized_volatility;
  double annualized_downside_volatility = 0.0;
  std::optional<double> correlation, beta;
  std::optional<double> annualized_turnover;
  std::size_t positive_periods = 0;
  std::size_t negative_periods = 0;  // everything that is not strictly positive
};

namespace detail {

inline std::vector<double> simple_returns(std::span<const double> v) {
  std::vector<double> r;
  r.reserve(v.size() > 0 ? v.size() - 1 : 0);
  for (std::size_t t = 1; t < v.size(); ++t) r.push_back(v[t] / v[t - 1] - 1.0);
  return r;
}

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// n - 1 denominator; needs at least two values.
inline double stdev(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline std::optional<double> sharpe(std::span<const double> r, double rf_annual) {
  if (r.size() < 2) return std::nullopt;
  const double m = mean(r);
  const double sd = stdev(r, m);
  if (!(sd > 0.0)) return std::nullopt;
  return (m - rf_annual / kTradingDays) / sd * std::sqrt(kTradingDays);
}

// Values of `series` on the given dates; every date must be present.
inline std::vector<double> align(const PriceSeries& series, const std::vector<Date>& dates, const char* what) {
  std::vector<double> out;
  out.reserve(dates.size());
  std::size_t j = 0;
  for (const Date& d : dates) {
    while (j < series.dates.size() && series.dates[j] < d) ++j;
    if (j == series.dates.size() || series.dates[j] != d)
      fail(ErrorCode::invalid_argument, std::string(what) + " has no value on " + d.to_string());
    out.push_back(series.values[j]);
  }
  return out;
}

}  // namespace detail

// Metrics of a value path. The benchmark, when given, must cover every date
// of `values`. `turnover` is the summed rebalance turnover, annualized here.
inline PerformanceReport performance_metrics(const PriceSeries& values, const PriceSeries* benchmark = nullptr,
                                             double risk_free = 0.0, std::optional<double> turnover = {}) {
  const std::size_t n = values.size();
  if (n < 2) fail(ErrorCode::too_few_rows, "performance metrics need at least 2 values");
  if (values.dates.size() != n) fail(ErrorCode::invalid_argument, "dates and values differ in length");
  for (double v : values.values)
    if (!(v > 0.0)) fail(ErrorCode::invalid_argument, "value series must be positive");

  PerformanceReport rep;
  const auto r = detail::simple_returns(values.values);
  rep.periods = r.size();
  const double growth = values.values.back() / values.values.front();
  rep.ending_vami = 1000.0 * growth;
  rep.annualized_return = std::pow(growth, kTradingDays / static_cast<double>(rep.periods)) - 1.0;

  double peak = values.values[0];
  std::size_t peak_at = 0;
  for (std::size_t t = 1; t < n; ++t) {
    const double v = values.values[t];
    if (v > peak) {
      peak = v;
      peak_at = t;
      continue;
    }
    const double dd = (peak - v) / peak;
    if (dd > rep.max_drawdown) {
      rep.max_drawdown = dd;
      rep.peak_index = peak_at;
      rep.valley_index = t;
    }
  }
  if (rep.valley_index) {
    rep.peak_date = values.dates[*rep.peak_index];
    rep.valley_date = values.dates[*rep.valley_index];
    const double prior_peak = values.values[*rep.peak_index];
    for (std::size_t t = *rep.valley_index + 1; t < n; ++t)
      if (values.values[t] >= prior_peak) {
        rep.recovery_days = t - *rep.valley_index;
        break;
      }
    rep.calmar = rep.annualized_return / rep.max_drawdown;
  }

  rep.sharpe = detail::sharpe(r, risk_free);
  const double m = detail::mean(r);
  if (r.size() >= 2) rep.annualized_volatility = detail::stdev(r, m) * std::sqrt(kTradingDays);
  double down = 0.0;
  for (double x : r) {
    if (x > 0.0) ++rep.positive_periods;
    else ++rep.negative_periods;
    if (x < 0.0) down += x * x;
  }
  const double downside = std::sqrt(down / static_cast<double>(r.size()));
  rep.annualized_downside_volatility = downside * std::sqrt(kTradingDays);
  if (downside > 0.0) rep.sortino = (m - risk_free / kTradingDays) / downside * std::sqrt(kTradingDays);

  if (benchmark) {
    const auto b = detail::simple_returns(detail::align(*benchmark, values.dates, "benchmark"));
    const double mb = detail::mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
      sab += (r[t] - m) * (b[t] - mb);
      saa += (r[t] - m) * (r[t] - m);
      sbb += (b[t] - mb) * (b[t] - mb);
    }
    if (sbb > 0.0) rep.beta = sab / sbb;
    if (sbb > 0.0 && saa > 0.0) rep.correlation = sab / std::sqrt(saa * sbb);
  }
  if (turnover) rep.annualized_turnover = *turnover * kTradingDays / static_cast<double>(rep.periods);
  return rep;
}

struct BacktestResult {
  PriceSeries values;  // starts at initial_capital on the first rebalance day
  std::vector<RebalanceRecord> rebalances;
  PerformanceReport report;
};

namespace detail {

// Partition of the window columns plus the threshold when ACC chose it.
inline std::pair<Partition, std::optional<double>> cluster_window(const Matrix& returns,
                                                                  const std::vector<std::string>& tickers,
                                                                  const BacktestConfig& cfg) {
  const std::size_t d = tickers.size();
  if (d == 1) return {Partition::singletons(1), std::nullopt};
  switch (cfg.method) {
    case ClusterMethod::acc: {
      ReturnsPanel panel;
      panel.tickers = tickers;
      panel.values = returns;
      auto res = acc(panel, cfg.acc);
      return {std::move(res.partition), res.epsilon};
    }
    case ClusterMethod::kmedoids:
    case ClusterMethod::single_linkage: {
      const auto dist = corr_distance(sample_correlation(standardize(returns, tickers)));
      const std::size_t k = std::min(cfg.k, d);
      if (cfg.method == ClusterMethod::kmedoids) return {kmedoids(dist, k, cfg.seed).partition, std::nullopt};
      return {single_linkage(dist, k), std::nullopt};
    }
    case ClusterMethod::fixed_groups: {
      // Tickers absent from the group file form their own clusters.
      std::map<std::string, std::size_t> ids;
      std::vector<std::size_t> labels(d);
      for (std::size_t i = 0; i < d; ++i) {
        const auto it = cfg.fixed_groups.find(tickers[i]);
        const std::string key = it == cfg.fixed_groups.end() ? "\x01" + tickers[i] : it->second;
        labels[i] = ids.try_emplace(key, ids.size()).first->second;
      }
      return {Partition(std::move(labels)), std::nullopt};
    }
  }
  fail(ErrorCode::invalid_argument, "unknown clustering method");
}

inline Matrix window_returns(const Matrix& prices, std::size_t from, std::size_t to,
                             const std::vector<std::size_t>& cols) {
  const auto n = static_cast<Eigen::Index>(to - from);
  Matrix r(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(cols[j]);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto row = static_cast<Eigen::Index>(from) + t;
      r(t, static_cast<Eigen::Index>(j)) = prices(row + 1, c) / prices(row, c) - 1.0;
    }
  }
  return r;
}

}  // namespace detail

inline BacktestResult run_backtest(const PricePanel& panel, const ConstituencyTable* constituents,
                                   const PriceSeries* benchmark, const BacktestConfig& cfg) {
  cfg.validate();
  const std::size_t rows = panel.rows(), d = panel.cols();
  if (rows == 0 || d == 0) fail(ErrorCode::insufficient_history, "empty price panel");
  if (cfg.market_neutral && !benchmark) fail(ErrorCode::invalid_argument, "market-neutral strategy needs a benchmark");

  // Repaired prices for returns and valuation; untouched columns stay NaN.
  Matrix px = panel.prices;
  std::vector<std::size_t> first_valid(d, rows);
  for (std::size_t c = 0; c < d; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    std::vector<double> raw(rows);
    for (std::size_t t = 0; t < rows; ++t) raw[t] = panel.prices(static_cast<Eigen::Index>(t), col);
    const auto it = std::find_if(raw.begin(), raw.end(), [](double v) { return !is_missing(v); });
    if (it == raw.end()) continue;
    first_valid[c] = static_cast<std::size_t>(it - raw.begin());
    const auto fixed = repair_missing(raw);
    for (std::size_t t = 0; t < rows; ++t) px(static_cast<Eigen::Index>(t), col) = fixed[t];
  }

  std::vector<double> bench;
  if (benchmark) {
    std::vector<double> raw(rows, kMissing);
    std::size_t j = 0;
    for (std::size_t t = 0; t < rows; ++t) {
      while (j < benchmark->size() && benchmark->dates[j] < panel.dates[t]) ++j;
      if (j < benchmark->size() && benchmark->dates[j] == panel.dates[t]) raw[t] = benchmark->values[j];
    }
    bench = repair_missing(raw);
  }

  std::vector<bool> is_rebalance(rows, false);
  for (auto t : rebalance_schedule(panel.dates, cfg.frequency, cfg.anchor_month))
    if (t >= cfg.window) is_rebalance[t] = true;

  BacktestResult out;
  Vector shares = Vector::Zero(static_cast<Eigen::Index>(d));
  double bench_shares = 0.0;
  bool started = false;
  double total_turnover = 0.0;

  for (std::size_t t = 0; t < rows; ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    double value = 0.0;
    if (started) {
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(d); ++c)
        if (shares(c) != 0.0) value += shares(c) * px(row, c);
      if (bench_shares != 0.0) value += bench_shares * bench[t];
    }

    if (is_rebalance[t]) {
      const auto eligible = filter_universe(panel, constituents, t, cfg.window, cfg.filter);
      if (eligible.empty()) {
        if (!started) continue;
        fail(ErrorCode::insufficient_history, "rebalance " + panel.dates[t].to_string() + ": no eligible tickers");
      }
      RebalanceRecord rec;
      rec.date = panel.dates[t];
      rec.universe = eligible.size();
      try {
        std::vector<std::string> names;
        for (auto c : eligible) names.push_back(panel.tickers[c]);
        const Matrix window = detail::window_returns(px, t - cfg.window, t, eligible);

        std::vector<std::size_t> chosen;  // indices into eligible
        if (cfg.selector) {
          chosen = cfg.selector(RebalanceContext{rec.date, names, window});
          std::sort(chosen.begin(), chosen.end());
          chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
          if (chosen.empty() || chosen.back() >= eligible.size())
            fail(ErrorCode::invalid_argument, "selector returned an invalid index set");
          rec.clusters = chosen.size();
        } else {
          auto [part, eps] = detail::cluster_window(window, names, cfg);
          rec.clusters = part.num_clusters();
          rec.epsilon = eps;
          std::vector<double> var(eligible.size());
          for (std::size_t j = 0; j < eligible.size(); ++j) {
            const auto col = window.col(static_cast<Eigen::Index>(j));
            const double m = col.mean();
            var[j] = (col.array() - m).square().sum() / static_cast<double>(window.rows() - 1);
          }
          chosen = select_representatives(part, var);
          std::sort(chosen.begin(), chosen.end());
        }

        // Allocation window starts once every selected stock has a price.
        std::vector<std::size_t> cols;
        std::size_t from = t - cfg.window;
        for (auto j : chosen) {
          cols.push_back(eligible[j]);
          from = std::max(from, first_valid[eligible[j]]);
        }
        if (t - from < 2)
          fail(ErrorCode::insufficient_history, "fewer than 2 common returns for the selected stocks");
        const Matrix alloc_returns = detail::window_returns(px, from, t, cols);
        std::vector<std::string> held;
        for (auto c : cols) held.push_back(panel.tickers[c]);
        const CovarianceMatrix cov = sample_covariance(alloc_returns, held);

        PortfolioWeights w;
        switch (cfg.strategy) {
          case Strategy::risk_parity: w = risk_parity_weights(cov); break;
          case Strategy::min_variance: w = min_variance_weights(cov); break;
          case Strategy::mean_variance:
            w = mean_variance_weights(cov, alloc_returns.colwise().mean().transpose(),
                                      cfg.target_return / kTradingDays);
            break;
        }
        rec.ridge_applied = w.ridge_applied;
        rec.tickers = held;
        rec.weights = w.weights;

        if (cfg.market_neutral) {
          std::vector<double> bret(t - from);
          for (std::size_t s = from; s < t; ++s) bret[s - from] = bench[s + 1] / bench[s] - 1.0;
          std::vector<double> betas(cols.size());
          for (std::size_t j = 0; j < cols.size(); ++j) {
            const Vector a = alloc_returns.col(static_cast<Eigen::Index>(j));
            betas[j] = estimate_beta(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())), bret);
          }
          const HedgedWeights h = beta_hedge(w, betas);
          rec.beta = h.beta;
          rec.tickers.push_back(cfg.benchmark_name);
          rec.weights.resize(static_cast<Eigen::Index>(rec.tickers.size()));
          rec.weights.head(static_cast<Eigen::Index>(cols.size())) = h.stock_weights;
          rec.weights(static_cast<Eigen::Index>(cols.size())) = h.benchmark_weight;
        }

        const double base = started ? value : cfg.initial_capital;
        Vector new_shares = Vector::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < cols.size(); ++j) {
          const auto c = static_cast<Eigen::Index>(cols[j]);
          new_shares(c) = base * rec.weights(static_cast<Eigen::Index>(j)) / px(row, c);
        }
        const double new_bench = cfg.market_neutral
                                     ? base * rec.weights(static_cast<Eigen::Index>(cols.size())) / bench[t]
                                     : 0.0;
        if (started) {
          double l1 = 0.0;
          for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(d); ++c)
            l1 += std::abs(new_shares(c) - shares(c)) * px(row, c);
          if (benchmark) l1 += std::abs(new_bench - bench_shares) * bench[t];
          rec.turnover = 0.5 * l1 / base;
          total_turnover += rec.turnover;
        }
        shares = new_shares;
        bench_shares = new_bench;
        value = base;
        started = true;
      } catch (const Error& e) {
        throw Error(e.code(), "rebalance " + rec.date.to_string() + ": " + e.message());
      }
      out.rebalances.push_back(std::move(rec));
    }

    if (started) {
      out.values.dates.push_back(panel.dates[t]);
      out.values.values.push_back(value);
    }
  }
  if (!started) fail(ErrorCode::insufficient_history, "no rebalance date with a full window and an eligible ticker");
  if (out.values.size() < 2) fail(ErrorCode::insufficient_history, "backtest covers fewer than 2 days");
  out.report = performance_metrics(out.values, benchmark, cfg.risk_free, total_turnover);
  return out;
}

struct RollingComparison {
  std::size_t window_len = 0;
  std::size_t windows = 0;         // windows compared on annualized return
  std::size_t sharpe_windows = 0;  // windows left after the Sharpe exclusions
  double return_win_frac = 0.0;
  std::optional<double> sharpe_win_frac;
};

// Compares every full window of `window_len` daily returns on the common
// dates of a and b. A win is a strictly larger value. Sharpe comparisons skip
// windows where both ratios are negative or either is undefined.
inline RollingComparison rolling_window_compare(const PriceSeries& a, const PriceSeries& b, std::size_t window_len,
                                                double risk_free = 0.0) {
  if (window_len < 2) fail(ErrorCode::invalid_argument, "window length must be >= 2");
  std::vector<double> va, vb;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a.dates[i] < b.dates[j]) ++i;
    else if (b.dates[j] < a.dates[i]) ++j;
    else {
      va.push_back(a.values[i++]);
      vb.push_back(b.values[j++]);
    }
  }
  if (va.size() < window_len + 1)
    fail(ErrorCode::no_valid_windows, "common history of " + std::to_string(va.size()) +
                                          " dates is shorter than one window of " + std::to_string(window_len));
  const auto ra = detail::simple_returns(va), rb = detail::simple_returns(vb);
  const std::size_t count = va.size() - window_len;

  // 1 = win, 0 = loss; Sharpe slot -1 = excluded.
  std::vector<int> ret_win(count), sharpe_win(count);
  parallel_for(0, count, [&](std::size_t s) {
    const double ann = kTradingDays / static_cast<double>(window_len);
    const double ga = std::pow(va[s + window_len] / va[s], ann) - 1.0;
    const double gb = std::pow(vb[s + window_len] / vb[s], ann) - 1.0;
    ret_win[s] = ga > gb;
    const auto sa = detail::sharpe(std::span<const double>(ra).subspan(s, window_len), risk_free);
    const auto sb = detail::sharpe(std::span<const double>(rb).subspan(s, window_len), risk_free);
    if (!sa || !sb || (*sa < 0.0 && *sb < 0.0)) sharpe_win[s] = -1;
    else sharpe_win[s] = *sa > *sb;
  });

  RollingComparison out;
  out.window_len = window_len;
  out.windows = count;
  std::size_t rw = 0, sw = 0;
  for (std::size_t s = 0; s < count; ++s) {
    rw += static_cast<std::size_t>(ret_win[s]);
    if (sharpe_win[s] >= 0) {
      ++out.sharpe_windows;
      sw += static_cast<std::size_t>(sharpe_win[s]);
    }
  }
  out.return_win_frac = static_cast<double>(rw) / static_cast<double>(count);
  if (out.sharpe_windows > 0)
    out.sharpe_win_frac = static_cast<double>(sw) / static_cast<double>(out.sharpe_windows);
  return out;
}

}  // namespace blockfolio
