#pragma once

// Synthetic equity market with block correlation: prices for d assets in K
// equal blocks plus an equal-weight index as benchmark.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <vector>

#include "blockfolio/blocksim.hpp"
#include "blockfolio/prices.hpp"

namespace blockfolio {

struct SyntheticMarketSpec {
  std::size_t d = 50;
  std::size_t k = 10;
  std::size_t days = 8 * 252;
  double within = 0.6;
  double cross = 0.2;
  double vol_lo = 0.10;  // annualized
  double vol_hi = 0.40;
  double drift = 0.08;   // annualized arithmetic mean return
  Distribution distribution;
  std::uint64_t seed = 2024;
};

struct SyntheticMarket {
  PricePanel prices;
  PriceSeries benchmark;            // equal-weight index, rebalanced daily, base 100
  std::vector<std::size_t> blocks;  // true block of each asset
};

inline SyntheticMarket make_synthetic_market(const SyntheticMarketSpec& spec) {
  if (spec.days < 2) fail(ErrorCode::invalid_argument, "need at least 2 days");
  const auto model = BlockmodelSpec::equal_blocks(spec.d, spec.k, spec.within, spec.cross, spec.distribution, spec.seed);
  const ReturnsPanel z = sample_returns(model, spec.days - 1);

  // Volatilities spread evenly over [vol_lo, vol_hi], interleaved so every
  // block mixes low- and high-volatility names.
  std::vector<double> vol(spec.d);
  for (std::size_t i = 0; i < spec.d; ++i) {
    const double rank = spec.d > 1 ? static_cast<double>((i * 7) % spec.d) / static_cast<double>(spec.d - 1) : 0.0;
    vol[i] = spec.vol_lo + (spec.vol_hi - spec.vol_lo) * rank;
  }

  SyntheticMarket out;
  out.blocks = model.assignment;
  out.prices.dates = business_days(Date(2000, 1, 3), spec.days);
  out.prices.tickers.resize(spec.d);
  for (std::size_t i = 0; i < spec.d; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%02zu", i);
    out.prices.tickers[i] = buf;
  }
  const auto n = static_cast<Eigen::Index>(spec.days);
  const auto d = static_cast<Eigen::Index>(spec.d);
  out.prices.prices.resize(n, d);
  out.prices.prices.row(0).setConstant(100.0);
  out.benchmark.dates = out.prices.dates;
  out.benchmark.values.assign(spec.days, 100.0);
  for (Eigen::Index t = 1; t < n; ++t) {
    double index_ret = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double sd = vol[static_cast<std::size_t>(i)] / std::sqrt(252.0);
      const double r = spec.drift / 252.0 + sd * z.values(t - 1, i);
      out.prices.prices(t, i) = out.prices.prices(t - 1, i) * (1.0 + r);
      index_ret += r;
    }
    const auto ts = static_cast<std::size_t>(t);
    out.benchmark.values[ts] = out.benchmark.values[ts - 1] * (1.0 + index_ret / static_cast<double>(d));
  }
  return out;
}

}  // namespace blockfolio
