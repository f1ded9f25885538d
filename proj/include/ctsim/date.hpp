#ifndef CTSIM_DATE_HPP
#define CTSIM_DATE_HPP

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ctsim {

/// Calendar date with day resolution, stored as days since 1970-01-01.
/// Supports the calendar arithmetic the monitoring schedule needs:
/// day steps and month steps with day-of-month clamped to month end.
class Date {
 public:
  Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static Date from_days(int64_t days_since_epoch) { return Date(days_since_epoch); }

  /// Parses "YYYY-MM-DD". Throws ParseError on anything else.
  static Date parse(std::string_view text);

  std::string to_string() const;
  int64_t days_since_epoch() const { return days_; }

  int year() const;
  unsigned month() const;
  unsigned day() const;

  Date plus_days(int64_t n) const { return Date(days_ + n); }
  Date plus_weeks(int64_t n) const { return Date(days_ + 7 * n); }

  /// Advances n calendar months; a day-of-month that does not exist in the
  /// target month is clamped to that month's last day (Aug 31 + 6 -> Feb 28/29).
  Date plus_months_clamped(int n) const;

  auto operator<=>(const Date&) const = default;

 private:
  explicit Date(int64_t days) : days_(days) {}
  int64_t days_ = 0;
};

/// b - a in whole days.
inline int64_t days_between(Date a, Date b) { return b.days_since_epoch() - a.days_since_epoch(); }

}  // namespace ctsim

#endif
