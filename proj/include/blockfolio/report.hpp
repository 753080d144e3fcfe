#pragma once

// JSON and CSV writers. Key order is fixed so output is byte-stable.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "blockfolio/acc.hpp"
#include "blockfolio/alloc.hpp"
#include "blockfolio/backtest.hpp"
#include "blockfolio/blocksim.hpp"

namespace blockfolio {

using Json = nlohmann::ordered_json;

namespace detail {
template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json opt(const std::optional<Date>& v) { return v ? Json(v->to_string()) : Json(nullptr); }

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}
}  // namespace detail

inline Json partition_json(const std::string& method, const std::vector<std::string>& tickers, const Partition& p) {
  Json j;
  j["method"] = method;
  j["tickers"] = tickers;
  j["labels"] = p.labels();
  j["clusters"] = p.num_clusters();
  return j;
}

inline Json partition_json(const AccResult& r) {
  Json j = partition_json("acc", r.tickers, r.partition);
  j["epsilon"] = r.epsilon;
  j["alpha"] = r.tail.alpha;
  j["L"] = r.tail.ell;
  j["alpha_floored"] = r.tail.floored;
  j["range"] = {r.range.lo, r.range.hi};
  j["range_regime"] = r.range.regime == RangeRegime::sqrt_log_d_over_n ? "sqrt_log_d_over_n" : "log_d_pow_over_n";
  j["intra_corr"] = r.intra_corr;
  return j;
}

inline Json weights_json(const std::string& strategy, const PortfolioWeights& w) {
  Json j;
  j["strategy"] = strategy;
  j["tickers"] = w.tickers;
  j["weights"] = std::vector<double>(w.weights.begin(), w.weights.end());
  j["ridge_applied"] = w.ridge_applied;
  return j;
}

inline Json weights_json(const std::string& strategy, const HedgedWeights& h) {
  Json j;
  j["strategy"] = strategy;
  j["tickers"] = h.tickers;
  j["weights"] = std::vector<double>(h.stock_weights.begin(), h.stock_weights.end());
  j["benchmark_weight"] = h.benchmark_weight;
  j["beta"] = h.beta;
  return j;
}

inline Json report_json(const PerformanceReport& r) {
  Json j;
  j["periods"] = r.periods;
  j["ending_vami"] = r.ending_vami;
  j["annualized_return"] = r.annualized_return;
  j["max_drawdown"] = r.max_drawdown;
  j["peak_date"] = detail::opt(r.peak_date);
  j["valley_date"] = detail::opt(r.valley_date);
  j["recovery_days"] = detail::opt(r.recovery_days);
  j["recovery_convention"] = "valley_to_prior_peak";
  j["sharpe"] = detail::opt(r.sharpe);
  j["sortino"] = detail::opt(r.sortino);
  j["sortino_threshold"] = 0.0;
  j["calmar"] = detail::opt(r.calmar);
  j["annualized_volatility"] = detail::opt(r.annualized_volatility);
  j["annualized_downside_volatility"] = r.annualized_downside_volatility;
  j["correlation"] = detail::opt(r.correlation);
  j["beta"] = detail::opt(r.beta);
  j["annualized_turnover"] = detail::opt(r.annualized_turnover);
  j["turnover_definition"] = "half L1 weight change per rebalance, summed, times 252 / periods";
  j["positive_periods"] = r.positive_periods;
  j["negative_periods"] = r.negative_periods;
  return j;
}

inline Json backtest_json(const BacktestResult& res, const BacktestConfig& cfg) {
  Json j;
  j["report"] = report_json(res.report);
  Json c;
  c["window"] = cfg.window;
  c["frequency"] = to_string(cfg.frequency);
  c["anchor_month"] = cfg.anchor_month;
  c["strategy"] = to_string(cfg.strategy);
  c["market_neutral"] = cfg.market_neutral;
  if (cfg.strategy == Strategy::mean_variance) c["target_return"] = cfg.target_return;
  c["method"] = cfg.selector ? "custom" : to_string(cfg.method);
  if (cfg.method == ClusterMethod::kmedoids || cfg.method == ClusterMethod::single_linkage) c["k"] = cfg.k;
  if (cfg.method == ClusterMethod::kmedoids) c["seed"] = cfg.seed;
  if (cfg.method == ClusterMethod::acc) c["clusters"] = {cfg.acc.k_min, cfg.acc.k_max};
  c["min_history_days"] = cfg.filter.min_history_days;
  c["max_missing_frac"] = cfg.filter.max_missing_frac;
  c["initial_capital"] = cfg.initial_capital;
  c["risk_free"] = cfg.risk_free;
  j["config"] = c;
  Json rebs = Json::array();
  for (const auto& r : res.rebalances) {
    Json e;
    e["date"] = r.date.to_string();
    e["universe"] = r.universe;
    e["clusters"] = r.clusters;
    e["epsilon"] = detail::opt(r.epsilon);
    e["beta"] = detail::opt(r.beta);
    e["ridge_applied"] = r.ridge_applied;
    e["turnover"] = r.turnover;
    e["tickers"] = r.tickers;
    e["weights"] = std::vector<double>(r.weights.begin(), r.weights.end());
    rebs.push_back(std::move(e));
  }
  j["rebalances"] = std::move(rebs);
  return j;
}

inline Json recovery_json(const RecoveryResult& r) {
  Json j;
  j["seed"] = r.seed;
  j["exact"] = r.exact;
  j["ari"] = r.ari;
  j["tau"] = r.tau;
  j["delta"] = r.delta;
  j["epsilon_star"] = std::isnan(r.epsilon) ? Json(nullptr) : Json(r.epsilon);
  j["K_found"] = r.clusters_found;
  j["failure"] = r.failure ? Json(std::string(to_string(*r.failure))) : Json(nullptr);
  return j;
}

inline void write_series_csv(std::ostream& out, const PriceSeries& s, const char* value_name = "value") {
  out << "date," << value_name << '\n';
  for (std::size_t t = 0; t < s.size(); ++t) out << s.dates[t].to_string() << ',' << detail::format_double(s.values[t]) << '\n';
}

inline void write_weights_csv(std::ostream& out, const std::vector<RebalanceRecord>& rebalances) {
  out << "date,ticker,weight\n";
  for (const auto& r : rebalances)
    for (std::size_t i = 0; i < r.tickers.size(); ++i)
      out << r.date.to_string() << ',' << r.tickers[i] << ','
          << detail::format_double(r.weights(static_cast<Eigen::Index>(i))) << '\n';
}

inline void write_prices_csv(std::ostream& out, const PricePanel& p) {
  out << "date";
  for (const auto& t : p.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t r = 0; r < p.rows(); ++r) {
    out << p.dates[r].to_string();
    for (std::size_t c = 0; c < p.cols(); ++c) {
      const double v = p.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      out << ',';
      if (!is_missing(v)) out << detail::format_double(v);
    }
    out << '\n';
  }
}

}  // namespace blockfolio
