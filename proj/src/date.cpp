#include "ctsim/date.hpp"

#include <charconv>
#include <chrono>

#include "ctsim/error.hpp"

namespace ctsim {

namespace {

std::chrono::year_month_day to_ymd(int64_t days) {
  return std::chrono::year_month_day{
      std::chrono::sys_days{std::chrono::days{days}}};
}

int64_t from_ymd_checked(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: " + std::to_string(year) + "-" +
                     std::to_string(month) + "-" + std::to_string(day));
  }
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  return Date(from_ymd_checked(year, month, day));
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  auto number = [&](size_t pos, size_t len) -> int {
    int value = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
      throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    return value;
  };
  int y = number(0, 4);
  int m = number(5, 2);
  int d = number(8, 2);
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw ParseError("invalid date '" + std::string(text) + "'");
  }
  return Date(from_ymd_checked(y, static_cast<unsigned>(m), static_cast<unsigned>(d)));
}

std::string Date::to_string() const {
  auto ymd = to_ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int Date::year() const { return static_cast<int>(to_ymd(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(days_).day()); }

Date Date::plus_months_clamped(int n) const {
  auto ymd = to_ymd(days_);
  ymd += std::chrono::months{n};
  if (!ymd.ok()) {
    ymd = ymd.year() / ymd.month() / std::chrono::last;
  }
  return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

}  // namespace ctsim
