#include "topictrace/date.hpp"

#include <charconv>
#include <cstdio>

#include "topictrace/errors.hpp"

namespace topictrace {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_digits(std::string_view s, std::size_t width, int& out) {
  if (s.size() != width) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

}  // namespace

unsigned Date::days_in_month(int year, unsigned month) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) return 0;
  return month == 2 && is_leap(year) ? 29 : kDays[month - 1];
}

bool Date::valid(int year, unsigned month, unsigned day) {
  return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
         day <= days_in_month(year, month);
}

Date Date::parse(std::string_view text) {
  const std::string_view s = trim(text);
  int y = 0, m = 1, d = 1;
  bool ok = false;
  if (s.size() == 4) {
    ok = parse_digits(s, 4, y);
  } else if (s.size() == 7 && s[4] == '-') {
    ok = parse_digits(s.substr(0, 4), 4, y) && parse_digits(s.substr(5, 2), 2, m);
  } else if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    ok = parse_digits(s.substr(0, 4), 4, y) && parse_digits(s.substr(5, 2), 2, m) &&
         parse_digits(s.substr(8, 2), 2, d);
  }
  if (!ok || !valid(y, static_cast<unsigned>(m), static_cast<unsigned>(d)))
    throw BadDate("invalid date '" + std::string(s) + "' (expected YYYY, YYYY-MM or YYYY-MM-DD)");
  return {y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

Date Date::next_month_start() const {
  return month == 12 ? Date{year + 1, 1, 1} : Date{year, month + 1, 1};
}

}  // namespace topictrace
