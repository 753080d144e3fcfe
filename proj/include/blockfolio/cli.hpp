#pragma once

// Command-line frontend: cluster, simulate, backtest, compare.
//
// Every flag may also come from a JSON file given with --config, keyed by the
// flag name without dashes. Config values override command-line flags.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blockfolio/acc.hpp"
#include "blockfolio/backtest.hpp"
#include "blockfolio/baselines.hpp"
#include "blockfolio/blocksim.hpp"
#include "blockfolio/report.hpp"

namespace blockfolio::cli {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kInputError = 2,
  kNoFeasibleThreshold = 3,
  kSolverError = 4,
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::no_feasible_threshold: return kNoFeasibleThreshold;
    case ErrorCode::eigen_failure:
    case ErrorCode::degenerate_fit:
    case ErrorCode::solver_failure:
    case ErrorCode::infeasible:
    case ErrorCode::zero_market_variance:
    case ErrorCode::degenerate_beta:
    case ErrorCode::negative_beta: return kSolverError;
    default: return kInputError;
  }
}

namespace detail {

inline void print_error(std::ostream& err, std::string_view code, const std::string& message) {
  Json j;
  j["code"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

// "lo..hi" or "lo,hi".
inline std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto sep = text.find("..");
  std::size_t skip = 2;
  if (sep == std::string::npos) {
    sep = text.find(',');
    skip = 1;
  }
  if (sep == std::string::npos) fail(ErrorCode::invalid_argument, "cluster range must look like 15..25");
  try {
    std::size_t used = 0;
    const std::string a = text.substr(0, sep), b = text.substr(sep + skip);
    const auto lo = std::stoul(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const auto hi = std::stoul(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return {lo, hi};
  } catch (const std::logic_error&) {
    fail(ErrorCode::invalid_argument, "bad cluster range '" + text + "'");
  }
}

inline std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto cell : blockfolio::detail::split_csv(text)) {
    const std::string part(cell);
    try {
      std::size_t used = 0;
      out.push_back(std::stoul(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      fail(ErrorCode::invalid_argument, "bad window length '" + part + "'");
    }
  }
  return out;
}

// Turns a JSON config object into extra "--key value" arguments.
inline std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::parse_error, path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::parse_error, path + ": config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    if (key == "config") fail(ErrorCode::parse_error, path + ": config files cannot nest");
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      out.push_back(flag + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!v.is_number() && !v.is_string()) fail(ErrorCode::parse_error, path + ": bad value for " + key);
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out.push_back(flag);
      out.push_back(joined);
    } else {
      fail(ErrorCode::parse_error, path + ": bad value for " + key);
    }
  }
  return out;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::invalid_argument, "cannot write " + path);
  f << text;
}

inline std::size_t row_at_or_before(const std::vector<Date>& dates, const std::string& as_of) {
  if (dates.empty()) fail(ErrorCode::insufficient_history, "empty price panel");
  if (as_of.empty()) return dates.size() - 1;
  const auto d = Date::parse(as_of);
  if (!d) fail(ErrorCode::invalid_argument, "bad --as-of date '" + as_of + "'");
  const auto it = std::upper_bound(dates.begin(), dates.end(), *d);
  if (it == dates.begin()) fail(ErrorCode::insufficient_history, "no prices on or before " + as_of);
  return static_cast<std::size_t>(it - dates.begin()) - 1;
}

inline std::map<std::string, std::string> load_groups(const std::string& path) {
  auto in = blockfolio::detail::open_input(path);
  const auto lines = blockfolio::detail::read_lines(in);
  std::map<std::string, std::string> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = blockfolio::detail::split_csv(lines[r].second);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty())
      blockfolio::detail::parse_fail(path, lines[r].first, "expected ticker,group");
    out[std::string(cells[0])] = std::string(cells[1]);
  }
  return out;
}

inline Distribution parse_distribution(const Json& j) {
  Distribution dist;
  std::string law;
  if (j.is_string()) {
    law = j.get<std::string>();
  } else if (j.is_object()) {
    law = j.at("law").get<std::string>();
    if (j.contains("nu")) dist.nu = j.at("nu").get<double>();
  } else {
    fail(ErrorCode::invalid_spec, "distribution must be a name or an object");
  }
  if (law == "gaussian") dist.law = Law::gaussian;
  else if (law == "student_t") dist.law = Law::student_t;
  else if (law == "laplace") dist.law = Law::laplace;
  else fail(ErrorCode::invalid_spec, "unknown distribution '" + law + "'");
  return dist;
}

}  // namespace detail

struct Experiment {
  BlockmodelSpec model;
  std::size_t n = 0;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  AccConfig acc;
};

// Keys: d, K, within_corr, cross_corr or Sigma_F (+ optional assignment), n,
// trials, distribution, nu, seed, acc {a, b, n_grids, clusters, epsilon_cap, k_frac}.
inline Experiment parse_experiment(const Json& j) {
  static const std::vector<std::string> known{"d",     "K",      "within_corr",  "cross_corr", "Sigma_F", "assignment",
                                              "n",     "trials", "distribution", "nu",         "seed",    "acc"};
  if (!j.is_object()) fail(ErrorCode::invalid_spec, "experiment must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorCode::invalid_spec, "unknown experiment key '" + key + "'");
  Experiment e;
  try {
    Distribution dist;
    if (j.contains("distribution")) dist = detail::parse_distribution(j.at("distribution"));
    if (j.contains("nu")) dist.nu = j.at("nu").get<double>();
    if (j.contains("Sigma_F")) {
      const auto& rows = j.at("Sigma_F");
      const auto k = static_cast<Eigen::Index>(rows.size());
      e.model.sigma_f.resize(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != k) fail(ErrorCode::invalid_spec, "Sigma_F must be square");
        for (Eigen::Index c = 0; c < k; ++c) e.model.sigma_f(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
      if (j.contains("assignment")) {
        e.model.assignment = j.at("assignment").get<std::vector<std::size_t>>();
      } else {
        const auto d = j.at("d").get<std::size_t>();
        e.model.assignment.resize(d);
        for (std::size_t i = 0; i < d; ++i) e.model.assignment[i] = i * static_cast<std::size_t>(k) / d;
      }
    } else {
      const auto d = j.at("d").get<std::size_t>();
      const auto k = j.at("K").get<std::size_t>();
      if (k < 1 || k > d) fail(ErrorCode::invalid_spec, "need 1 <= K <= d");
      e.model = BlockmodelSpec::equal_blocks(d, k, j.at("within_corr").get<double>(), j.value("cross_corr", 0.0));
    }
    e.model.distribution = dist;
    e.n = j.at("n").get<std::size_t>();
    e.trials = j.value("trials", std::size_t{100});
    e.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("acc")) {
      const auto& a = j.at("acc");
      for (const auto& [key, value] : a.items())
        if (key != "a" && key != "b" && key != "n_grids" && key != "clusters" && key != "epsilon_cap" &&
            key != "k_frac")
          fail(ErrorCode::invalid_spec, "unknown acc key '" + key + "'");
      e.acc.a = a.value("a", e.acc.a);
      e.acc.b = a.value("b", e.acc.b);
      e.acc.n_grids = a.value("n_grids", e.acc.n_grids);
      e.acc.epsilon_cap = a.value("epsilon_cap", e.acc.epsilon_cap);
      e.acc.k_frac = a.value("k_frac", e.acc.k_frac);
      if (a.contains("clusters")) {
        const auto range = a.at("clusters").get<std::vector<std::size_t>>();
        if (range.size() != 2) fail(ErrorCode::invalid_spec, "acc.clusters must be [lo, hi]");
        e.acc.k_min = range[0];
        e.acc.k_max = range[1];
      }
    }
  } catch (const Json::exception& ex) {
    fail(ErrorCode::invalid_spec, ex.what());
  }
  if (e.trials < 1) fail(ErrorCode::invalid_spec, "trials must be >= 1");
  if (e.n < 2) fail(ErrorCode::invalid_spec, "n must be >= 2");
  e.model.validate();
  try {
    e.acc.validate();
  } catch (const Error& ex) {
    fail(ErrorCode::invalid_spec, ex.message());
  }
  return e;
}

struct SimulationSummary {
  std::vector<RecoveryResult> trials;
  std::size_t exact = 0;
  double mean_ari = 0.0;
  double mean_tau = 0.0;
};

inline SimulationSummary run_experiment(const Experiment& e) {
  SimulationSummary s;
  double tau_sum = 0.0;
  std::size_t tau_count = 0;
  for (std::size_t t = 0; t < e.trials; ++t) {
    BlockmodelSpec spec = e.model;
    spec.seed = e.seed + t;
    auto r = recovery_trial(spec, e.n, e.acc);
    s.exact += r.exact;
    s.mean_ari += r.ari;
    if (std::isfinite(r.tau)) {
      tau_sum += r.tau;
      ++tau_count;
    }
    s.trials.push_back(r);
  }
  s.mean_ari /= static_cast<double>(e.trials);
  s.mean_tau = tau_count ? tau_sum / static_cast<double>(tau_count) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

inline std::string trials_csv(const SimulationSummary& s) {
  using blockfolio::detail::format_double;
  std::ostringstream o;
  o << "seed,exact,ari,tau,delta,epsilon_star,K_found\n";
  for (const auto& r : s.trials) {
    o << r.seed << ',' << (r.exact ? 1 : 0) << ',' << format_double(r.ari) << ','
      << (std::isfinite(r.tau) ? format_double(r.tau) : "") << ',' << format_double(r.delta) << ','
      << (std::isnan(r.epsilon) ? "" : format_double(r.epsilon)) << ',' << r.clusters_found << '\n';
  }
  return o.str();
}

struct Options {
  std::string config;
  unsigned threads = 0;
  std::string out;

  // data
  std::string prices, benchmark, constituents, groups;
  std::string as_of;
  std::size_t window = 500;

  // clustering
  std::string method = "acc";
  std::string clusters = "15..25";
  std::size_t k = kDefaultBaselineClusters;
  std::uint64_t seed = 0;
  double a = 0.1, b = 10.0;
  std::size_t grids = 100;

  // backtest
  std::string strategy = "risk_parity";
  std::string frequency = "annual";
  unsigned anchor_month = 2;
  bool market_neutral = false;
  double target_return = 0.10;
  std::size_t min_history_days = 5 * 252;
  double max_missing_frac = 0.05;
  double initial_capital = 1000.0;
  double risk_free = 0.0;
  std::string values_out, weights_out;

  // simulate
  std::string experiment, summary;

  // compare
  std::string series_a, series_b, windows = "252";
};

namespace detail {

inline AccConfig acc_config(const Options& o) {
  AccConfig cfg;
  const auto [lo, hi] = parse_range(o.clusters);
  cfg.k_min = lo;
  cfg.k_max = hi;
  cfg.a = o.a;
  cfg.b = o.b;
  cfg.n_grids = o.grids;
  return cfg;
}

inline std::string cmd_cluster(const Options& o) {
  const auto panel = load_prices(o.prices);
  const std::size_t t = row_at_or_before(panel.dates, o.as_of);
  if (o.window < 2) fail(ErrorCode::invalid_argument, "window must be >= 2");
  if (t < o.window)
    fail(ErrorCode::insufficient_history, "need " + std::to_string(o.window + 1) + " price rows up to " +
                                              panel.dates[t].to_string() + ", have " + std::to_string(t + 1));
  FilterConfig filter{o.window + 1, o.max_missing_frac};
  const auto cols = filter_universe(panel, nullptr, t, o.window + 1, filter);
  if (cols.size() < 2) fail(ErrorCode::insufficient_history, "fewer than 2 tickers have data over the window");

  Matrix px(static_cast<Eigen::Index>(o.window + 1), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> tickers;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::vector<double> raw(o.window + 1);
    for (std::size_t r = 0; r <= o.window; ++r)
      raw[r] = panel.prices(static_cast<Eigen::Index>(t - o.window + r), static_cast<Eigen::Index>(cols[j]));
    const auto fixed = repair_missing(raw);
    for (std::size_t r = 0; r <= o.window; ++r)
      px(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = fixed[r];
    tickers.push_back(panel.tickers[cols[j]]);
  }
  std::vector<std::size_t> all(cols.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix returns = blockfolio::detail::window_returns(px, 0, o.window, all);

  Json j;
  Json echo;
  echo["method"] = o.method;
  echo["window"] = o.window;
  echo["as_of"] = panel.dates[t].to_string();
  if (o.method == "acc") {
    ReturnsPanel rp;
    rp.tickers = tickers;
    rp.values = returns;
    const auto cfg = acc_config(o);
    j = partition_json(acc(rp, cfg));
    echo["clusters"] = {cfg.k_min, cfg.k_max};
    echo["a"] = cfg.a;
    echo["b"] = cfg.b;
    echo["grids"] = cfg.n_grids;
  } else if (o.method == "kmedoids" || o.method == "single_linkage") {
    const auto dist = corr_distance(sample_correlation(standardize(returns, tickers)));
    echo["k"] = o.k;
    if (o.method == "kmedoids") {
      const auto res = kmedoids(dist, o.k, o.seed);
      j = partition_json(o.method, tickers, res.partition);
      std::vector<std::string> medoids;
      for (auto m : res.medoids) medoids.push_back(tickers[m]);
      j["medoids"] = medoids;
      j["cost"] = res.cost;
      echo["seed"] = o.seed;
    } else {
      j = partition_json(o.method, tickers, single_linkage(dist, o.k));
    }
  } else {
    fail(ErrorCode::invalid_argument, "unknown method '" + o.method + "'");
  }
  j["config"] = echo;
  return j.dump(2) + "\n";
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  auto in = blockfolio::detail::open_input(o.experiment);
  Json spec;
  try {
    spec = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::invalid_spec, o.experiment + ": " + e.what());
  }
  const auto e = parse_experiment(spec);
  const auto s = run_experiment(e);

  Json summary;
  summary["trials"] = e.trials;
  summary["exact"] = s.exact;
  summary["recovery_rate"] = static_cast<double>(s.exact) / static_cast<double>(e.trials);
  summary["mean_ari"] = s.mean_ari;
  summary["mean_tau"] = std::isnan(s.mean_tau) ? Json(nullptr) : Json(s.mean_tau);
  summary["delta"] = s.trials.front().delta;
  std::size_t failures = 0;
  for (const auto& r : s.trials) failures += r.failure.has_value();
  summary["acc_failures"] = failures;
  summary["distribution"] = e.model.distribution.name();
  summary["violates_tail_assumption"] = e.model.distribution.violates_tail_assumption();
  summary["experiment"] = spec;

  const std::string csv = trials_csv(s);
  const std::string text = summary.dump(2) + "\n";
  if (o.out.empty() || o.out == "-") {
    out << csv;
    if (!o.summary.empty()) emit(o.summary, text, out);
  } else {
    emit(o.out, csv, out);
    emit(o.summary, text, out);
  }
  return kOk;
}

inline BacktestConfig backtest_config(const Options& o) {
  BacktestConfig cfg;
  cfg.window = o.window;
  const auto f = parse_frequency(o.frequency);
  if (!f) fail(ErrorCode::invalid_argument, "unknown frequency '" + o.frequency + "'");
  cfg.frequency = *f;
  cfg.anchor_month = o.anchor_month;
  const auto s = parse_strategy(o.strategy);
  if (!s) fail(ErrorCode::invalid_argument, "unknown strategy '" + o.strategy + "'");
  cfg.strategy = *s;
  cfg.market_neutral = o.market_neutral;
  cfg.target_return = o.target_return;
  const auto m = parse_cluster_method(o.method);
  if (!m) fail(ErrorCode::invalid_argument, "unknown method '" + o.method + "'");
  cfg.method = *m;
  cfg.k = o.k;
  cfg.seed = o.seed;
  if (cfg.method == ClusterMethod::acc) cfg.acc = acc_config(o);
  if (!o.groups.empty()) cfg.fixed_groups = load_groups(o.groups);
  cfg.filter.min_history_days = o.min_history_days;
  cfg.filter.max_missing_frac = o.max_missing_frac;
  cfg.initial_capital = o.initial_capital;
  cfg.risk_free = o.risk_free;
  return cfg;
}

inline std::string cmd_backtest(const Options& o, std::ostream& out) {
  const auto cfg = backtest_config(o);
  const auto panel = load_prices(o.prices);
  std::optional<PriceSeries> bench;
  if (!o.benchmark.empty()) bench = load_series(o.benchmark);
  std::optional<ConstituencyTable> table;
  if (!o.constituents.empty()) table = load_constituents(o.constituents);
  const auto res = run_backtest(panel, table ? &*table : nullptr, bench ? &*bench : nullptr, cfg);
  if (!o.values_out.empty()) {
    std::ostringstream v;
    write_series_csv(v, res.values);
    emit(o.values_out, v.str(), out);
  }
  if (!o.weights_out.empty()) {
    std::ostringstream w;
    write_weights_csv(w, res.rebalances);
    emit(o.weights_out, w.str(), out);
  }
  return backtest_json(res, cfg).dump(2) + "\n";
}

inline std::string cmd_compare(const Options& o) {
  const auto a = load_series(o.series_a);
  const auto b = load_series(o.series_b);
  const auto lens = parse_list(o.windows);
  if (lens.empty()) fail(ErrorCode::invalid_argument, "no window lengths given");
  std::ostringstream csv;
  csv << "window_len,return_win_frac,sharpe_win_frac\n";
  for (auto len : lens) {
    const auto r = rolling_window_compare(a, b, len, o.risk_free);
    csv << len << ',' << blockfolio::detail::format_double(r.return_win_frac) << ','
        << (r.sharpe_win_frac ? blockfolio::detail::format_double(*r.sharpe_win_frac) : "") << '\n';
  }
  return csv.str();
}

}  // namespace detail

// args excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Correlation-blockmodel asset clustering, allocation and backtesting", "blockfolio"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "blockfolio 1.0");

  auto common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", o.config, "JSON file of flag values (keys are flag names); overrides flags");
    sub->add_option("--threads", o.threads, "Worker thread cap (default: $BLOCKFOLIO_THREADS, else all cores)");
  };
  auto acc_flags = [&](CLI::App* sub) {
    sub->add_option("--clusters", o.clusters, "ACC cluster-count range lo..hi")->capture_default_str();
    sub->add_option("--a", o.a, "ACC threshold range multiplier a")->capture_default_str();
    sub->add_option("--b", o.b, "ACC threshold range multiplier b")->capture_default_str();
    sub->add_option("--grids", o.grids, "ACC threshold grid points")->capture_default_str();
    sub->add_option("--k", o.k, "Cluster count for kmedoids and single_linkage")->capture_default_str();
    sub->add_option("--seed", o.seed, "kmedoids seed")->capture_default_str();
  };

  auto* cluster = app.add_subcommand("cluster", "Cluster the tickers of a price file over a trailing window");
  common(cluster);
  cluster->add_option("--prices", o.prices, "Wide price CSV (date,T1,T2,...)")->required();
  cluster->add_option("--method", o.method, "acc | kmedoids | single_linkage")->capture_default_str();
  cluster->add_option("--window", o.window, "Number of daily returns in the window")->capture_default_str();
  cluster->add_option("--as-of", o.as_of, "Last date of the window (default: last date in file)");
  cluster->add_option("--max-missing-frac", o.max_missing_frac, "Drop tickers missing more than this in the window")
      ->capture_default_str();
  acc_flags(cluster);
  cluster->add_option("--out", o.out, "Output JSON path (default: stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run blockmodel recovery trials");
  common(simulate);
  simulate->add_option("--experiment", o.experiment, "Experiment JSON")->required();
  simulate->add_option("--out", o.out, "Trials CSV path (default: stdout)");
  simulate->add_option("--summary", o.summary, "Summary JSON path (default: stdout when --out is a file)");

  auto* backtest = app.add_subcommand("backtest", "Backtest a cluster-then-allocate strategy");
  common(backtest);
  backtest->add_option("--prices", o.prices, "Wide adjusted-price CSV")->required();
  backtest->add_option("--benchmark", o.benchmark, "Benchmark CSV (date,price)");
  backtest->add_option("--constituents", o.constituents,
                       "Index membership CSV (ticker,start_date,end_date,class_group,listing_date)");
  backtest->add_option("--groups", o.groups, "ticker,group CSV for --method fixed_groups");
  backtest->add_option("--method", o.method, "acc | kmedoids | single_linkage | fixed_groups")->capture_default_str();
  backtest->add_option("--strategy", o.strategy, "risk_parity | min_variance | mean_variance")->capture_default_str();
  backtest->add_flag("--market-neutral", o.market_neutral, "Hedge the portfolio beta with the benchmark");
  backtest->add_option("--target-return", o.target_return, "Annualized target for mean_variance")
      ->capture_default_str();
  backtest->add_option("--window", o.window, "Estimation window in daily returns")->capture_default_str();
  backtest->add_option("--frequency", o.frequency, "annual | semiannual | quarterly")->capture_default_str();
  backtest->add_option("--anchor-month", o.anchor_month, "Month of the first rebalance in each year")
      ->capture_default_str();
  backtest->add_option("--min-history-days", o.min_history_days, "Price rows a ticker needs before it is eligible")
      ->capture_default_str();
  backtest->add_option("--max-missing-frac", o.max_missing_frac, "Missing-price limit inside the window")
      ->capture_default_str();
  backtest->add_option("--initial-capital", o.initial_capital, "Starting portfolio value")->capture_default_str();
  backtest->add_option("--risk-free", o.risk_free, "Annual risk-free rate for Sharpe and Sortino")
      ->capture_default_str();
  acc_flags(backtest);
  backtest->add_option("--out", o.out, "Report JSON path (default: stdout)");
  backtest->add_option("--values-out", o.values_out, "Daily value CSV path");
  backtest->add_option("--weights-out", o.weights_out, "Weights history CSV path");

  auto* compare = app.add_subcommand("compare", "Rolling-window win rates of one value series over another");
  common(compare);
  compare->add_option("--a", o.series_a, "Value CSV of the strategy (date,value)")->required();
  compare->add_option("--b", o.series_b, "Value CSV of the reference (date,value)")->required();
  compare->add_option("--windows", o.windows, "Comma-separated window lengths in days")->capture_default_str();
  compare->add_option("--risk-free", o.risk_free, "Annual risk-free rate for Sharpe")->capture_default_str();
  compare->add_option("--out", o.out, "Output CSV path (default: stdout)");

  try {
    // Config values go last so they win under TakeLast.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty()) {
      const auto extra = detail::config_args(config_path);
      args.insert(args.end(), extra.begin(), extra.end());
    }
  } catch (const Error& e) {
    detail::print_error(err, to_string(e.code()), e.message());
    return exit_code_for(e.code());
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    detail::print_error(err, "UsageError", e.what());
    return kInputError;
  }

  if (o.threads == 0)
    if (const char* env = std::getenv("BLOCKFOLIO_THREADS")) o.threads = static_cast<unsigned>(std::atoi(env));
  set_max_threads(o.threads);

  try {
    if (cluster->parsed()) detail::emit(o.out, detail::cmd_cluster(o), out);
    else if (simulate->parsed()) return detail::cmd_simulate(o, out);
    else if (backtest->parsed()) detail::emit(o.out, detail::cmd_backtest(o, out), out);
    else if (compare->parsed()) detail::emit(o.out, detail::cmd_compare(o), out);
    return kOk;
  } catch (const Error& e) {
    detail::print_error(err, to_string(e.code()), e.message());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    detail::print_error(err, "Internal", e.what());
    return kUnexpected;
  }
}

}  // namespace blockfolio::cli
