// Writes the bundled synthetic market: prices and equal-weight benchmark.
//   make_synthetic <prices.csv> <benchmark.csv> [seed]

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "blockfolio/report.hpp"
#include "blockfolio/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: make_synthetic <prices.csv> <benchmark.csv> [seed]\n";
    return 2;
  }
  blockfolio::SyntheticMarketSpec spec;
  if (argc > 3) spec.seed = std::strtoull(argv[3], nullptr, 10);
  const auto m = blockfolio::make_synthetic_market(spec);
  std::ofstream p(argv[1]), b(argv[2]);
  if (!p || !b) {
    std::cerr << "cannot write output\n";
    return 2;
  }
  blockfolio::write_prices_csv(p, m.prices);
  blockfolio::write_series_csv(b, m.benchmark, "price");
  return 0;
}
