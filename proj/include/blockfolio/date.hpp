#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockfolio {

// Calendar day. Stored as days since 1970-01-01 so comparisons are integer
// comparisons; text form is ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int year, unsigned month, unsigned day)
      : days_(std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}}) {}

  static std::optional<Date> parse(std::string_view text) {
    // Accept exactly YYYY-MM-DD.
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto ok = [](std::from_chars_result r, const char* end) {
      return r.ec == std::errc{} && r.ptr == end;
    };
    const char* p = text.data();
    if (!ok(std::from_chars(p, p + 4, y), p + 4)) return std::nullopt;
    if (!ok(std::from_chars(p + 5, p + 7, m), p + 7)) return std::nullopt;
    if (!ok(std::from_chars(p + 8, p + 10, d), p + 10)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days(ymd));
  }

  constexpr std::chrono::sys_days days() const { return days_; }
  constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day(days_); }
  constexpr int year() const { return static_cast<int>(ymd().year()); }
  constexpr unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  // Months since year 0; used for calendar-month arithmetic.
  constexpr int month_index() const { return year() * 12 + static_cast<int>(month()) - 1; }

  constexpr Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }

  std::string to_string() const {
    const auto ymd = this->ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

// Consecutive weekdays starting at (or after) `start`; used for synthetic panels.
inline std::vector<Date> business_days(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  Date d = start;
  while (out.size() < count) {
    const std::chrono::weekday wd{d.days()};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

}  // namespace blockfolio
