#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace topictrace {

// Calendar date at day precision.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const Date&) const = default;

  // Accepts YYYY, YYYY-MM or YYYY-MM-DD; partial dates map to the first day
  // of the period. Throws BadDate.
  static Date parse(std::string_view text);
  static bool valid(int year, unsigned month, unsigned day);
  static unsigned days_in_month(int year, unsigned month);

  std::string iso() const;
  Date last_of_month() const { return {year, month, days_in_month(year, month)}; }
  Date next_month_start() const;
};

}  // namespace topictrace
