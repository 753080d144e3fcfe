#pragma once

// Price data: wide CSV panels, two-column series, index constituency tables,
// and gap repair.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "blockfolio/corrcore.hpp"
#include "blockfolio/date.hpp"
#include "blockfolio/error.hpp"

namespace blockfolio {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) { return std::isnan(x); }

// Adjusted close prices, one column per ticker. NaN marks a missing price.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix prices;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return tickers.size(); }
  std::optional<std::size_t> find(std::string_view ticker) const {
    for (std::size_t i = 0; i < tickers.size(); ++i)
      if (tickers[i] == ticker) return i;
    return std::nullopt;
  }
};

// Dated scalar series: a benchmark price or a portfolio value path.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Plain comma splitting; quoted fields are not supported.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  fail(ErrorCode::parse_error, source + " line " + std::to_string(line) + ": " + what);
}

inline double parse_number(std::string_view text, const std::string& source, std::size_t line) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || !std::isfinite(v))
    parse_fail(source, line, "bad number '" + std::string(text) + "'");
  return v;
}

inline Date parse_date(std::string_view text, const std::string& source, std::size_t line) {
  const auto d = Date::parse(text);
  if (!d) parse_fail(source, line, "bad date '" + std::string(text) + "'");
  return *d;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open " + path);
  return in;
}

// Non-empty lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!trim(line).empty()) out.emplace_back(no, line);
  }
  return out;
}

}  // namespace detail

// Wide CSV: header "date,T1,T2,...", then one row per date. Empty cells are
// missing; present prices must be positive.
inline PricePanel parse_prices(std::istream& in, const std::string& source = "prices") {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) fail(ErrorCode::parse_error, source + ": empty file");
  const auto header = detail::split_csv(lines[0].second);
  if (header.size() < 2) detail::parse_fail(source, lines[0].first, "need a date column and at least one ticker");
  PricePanel out;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) detail::parse_fail(source, lines[0].first, "empty ticker name");
    out.tickers.emplace_back(header[c]);
  }
  const auto d = static_cast<Eigen::Index>(out.tickers.size());
  out.prices.resize(static_cast<Eigen::Index>(lines.size() - 1), d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [no, text] = lines[r];
    const auto cells = detail::split_csv(text);
    if (cells.size() != header.size())
      detail::parse_fail(source, no, "expected " + std::to_string(header.size()) + " fields, got " +
                                         std::to_string(cells.size()));
    const Date date = detail::parse_date(cells[0], source, no);
    if (!out.dates.empty() && !(out.dates.back() < date))
      fail(ErrorCode::non_monotone_dates, source + " line " + std::to_string(no) + ": " + date.to_string() +
                                              " does not follow " + out.dates.back().to_string());
    out.dates.push_back(date);
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto cell = cells[static_cast<std::size_t>(c) + 1];
      double v = kMissing;
      if (!cell.empty()) {
        v = detail::parse_number(cell, source, no);
        if (!(v > 0.0)) detail::parse_fail(source, no, "price must be positive");
      }
      out.prices(static_cast<Eigen::Index>(r - 1), c) = v;
    }
  }
  return out;
}

inline PricePanel load_prices(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_prices(in, path);
}

// Two columns "date,value" with a header row. No missing values.
inline PriceSeries parse_series(std::istream& in, const std::string& source = "series") {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) fail(ErrorCode::parse_error, source + ": empty file");
  PriceSeries out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [no, text] = lines[r];
    const auto cells = detail::split_csv(text);
    if (cells.size() != 2) detail::parse_fail(source, no, "expected 2 fields");
    const Date date = detail::parse_date(cells[0], source, no);
    if (!out.dates.empty() && !(out.dates.back() < date))
      fail(ErrorCode::non_monotone_dates, source + " line " + std::to_string(no) + ": " + date.to_string() +
                                              " does not follow " + out.dates.back().to_string());
    const double v = detail::parse_number(cells[1], source, no);
    out.dates.push_back(date);
    out.values.push_back(v);
  }
  return out;
}

inline PriceSeries load_series(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_series(in, path);
}

struct Membership {
  Date start;
  std::optional<Date> end;  // open-ended when absent

  bool contains(Date d) const { return !(d < start) && (!end || !(*end < d)); }
};

struct Constituent {
  std::vector<Membership> intervals;
  std::string class_group;  // tickers sharing a non-empty group are share classes of one company
  std::optional<Date> listing_date;
};

struct ConstituencyTable {
  std::map<std::string, Constituent> entries;

  bool is_member(const std::string& ticker, Date d) const {
    const auto it = entries.find(ticker);
    if (it == entries.end()) return false;
    return std::any_of(it->second.intervals.begin(), it->second.intervals.end(),
                       [&](const Membership& m) { return m.contains(d); });
  }
};

// Columns: ticker,start_date,end_date,class_group,listing_date. One row per
// membership interval; end_date, class_group and listing_date may be empty.
inline ConstituencyTable parse_constituents(std::istream& in, const std::string& source = "constituents") {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) fail(ErrorCode::parse_error, source + ": empty file");
  ConstituencyTable out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [no, text] = lines[r];
    auto cells = detail::split_csv(text);
    if (cells.size() < 2 || cells.size() > 5) detail::parse_fail(source, no, "expected 2 to 5 fields");
    cells.resize(5);
    if (cells[0].empty()) detail::parse_fail(source, no, "empty ticker");
    Membership m{detail::parse_date(cells[1], source, no), std::nullopt};
    if (!cells[2].empty()) {
      m.end = detail::parse_date(cells[2], source, no);
      if (*m.end < m.start) detail::parse_fail(source, no, "end_date before start_date");
    }
    auto& entry = out.entries[std::string(cells[0])];
    for (const auto& other : entry.intervals) {
      const bool disjoint = (m.end && *m.end < other.start) || (other.end && *other.end < m.start);
      if (!disjoint) detail::parse_fail(source, no, "overlapping membership interval");
    }
    entry.intervals.push_back(m);
    if (!cells[3].empty()) entry.class_group = std::string(cells[3]);
    if (!cells[4].empty()) entry.listing_date = detail::parse_date(cells[4], source, no);
  }
  return out;
}

inline ConstituencyTable load_constituents(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_constituents(in, path);
}

// Interior gaps are interpolated linearly in price; leading and trailing
// gaps take the nearest observed value.
inline std::vector<double> repair_missing(std::span<const double> series) {
  std::vector<double> out(series.begin(), series.end());
  const std::size_t n = out.size();
  std::size_t first = n, last = n;
  for (std::size_t t = 0; t < n; ++t)
    if (!is_missing(out[t])) {
      if (first == n) first = t;
      last = t;
    }
  if (first == n) fail(ErrorCode::all_missing, "series has no observed value");
  for (std::size_t t = 0; t < first; ++t) out[t] = out[first];
  for (std::size_t t = last + 1; t < n; ++t) out[t] = out[last];
  std::size_t prev = first;
  for (std::size_t t = first + 1; t <= last; ++t) {
    if (is_missing(out[t])) continue;
    const double span = static_cast<double>(t - prev);
    for (std::size_t g = prev + 1; g < t; ++g)
      out[g] = out[prev] + (out[t] - out[prev]) * static_cast<double>(g - prev) / span;
    prev = t;
  }
  return out;
}

}  // namespace blockfolio
