#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "epistrat/common.hpp"

namespace epistrat {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD), proleptic Gregorian.
inline Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  char tail = '\0';
  std::string buf(text);
  int got = std::sscanf(buf.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail);
  require(got == 3, "input", "unparseable date '" + buf + "' (expected YYYY-MM-DD)");
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  require(date.ok(), "input", "invalid calendar date '" + buf + "'");
  return date;
}

inline std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

inline Date add_days(Date date, int days) {
  return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

/// Number of days from `from` to `to` (negative if `to` precedes `from`).
inline int days_between(Date from, Date to) {
  return static_cast<int>(
      (std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

inline bool is_weekend(Date date) {
  std::chrono::weekday wd{std::chrono::sys_days{date}};
  return wd.iso_encoding() >= 6;
}

/// Day-of-week covariate: 2/7 on Monday-Friday, -5/7 on Saturday/Sunday.
/// Any full Monday-Sunday week sums to zero.
inline double weekday_effect(Date date) {
  return is_weekend(date) ? -5.0 / 7.0 : 2.0 / 7.0;
}

inline std::vector<double> weekday_covariate(const std::vector<Date>& dates) {
  std::vector<double> w;
  w.reserve(dates.size());
  for (Date d : dates) w.push_back(weekday_effect(d));
  return w;
}

inline std::vector<Date> date_range(Date start, int num_days) {
  require(num_days >= 0, "invalid-argument", "date range length must be nonnegative");
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(num_days));
  for (int t = 0; t < num_days; ++t) out.push_back(add_days(start, t));
  return out;
}

}  // namespace epistrat
