#include <doctest.h>

#include <algorithm>

#include "ctsim/date.hpp"
#include "ctsim/error.hpp"

using namespace ctsim;

TEST_CASE("date parse and format round-trip") {
  Date d = Date::parse("2019-01-01");
  CHECK(d.to_string() == "2019-01-01");
  CHECK(d.year() == 2019);
  CHECK(d.month() == 1);
  CHECK(d.day() == 1);
  CHECK(Date::parse("1990-12-31").to_string() == "1990-12-31");
}

TEST_CASE("date parse rejects malformed input") {
  CHECK_THROWS_AS(Date::parse("2019/01/01"), ParseError);
  CHECK_THROWS_AS(Date::parse("2019-1-1"), ParseError);
  CHECK_THROWS_AS(Date::parse("2019-02-30"), ParseError);
  CHECK_THROWS_AS(Date::parse("2019-13-01"), ParseError);
  CHECK_THROWS_AS(Date::parse("not-a-date"), ParseError);
  CHECK_THROWS_AS(Date::parse(""), ParseError);
}

TEST_CASE("date ordering and arithmetic") {
  Date a = Date::parse("2019-01-01");
  Date b = Date::parse("2019-01-08");
  CHECK(a < b);
  CHECK(a.plus_weeks(1) == b);
  CHECK(a.plus_days(7) == b);
  CHECK(days_between(a, b) == 7);
  CHECK(days_between(b, a) == -7);
}

TEST_CASE("month arithmetic clamps to month end") {
  CHECK(Date::parse("2019-01-01").plus_months_clamped(6) == Date::parse("2019-07-01"));
  CHECK(Date::parse("2019-08-31").plus_months_clamped(6) == Date::parse("2020-02-29"));
  CHECK(Date::parse("2019-03-31").plus_months_clamped(1) == Date::parse("2019-04-30"));
  CHECK(Date::parse("2020-02-29").plus_months_clamped(12) == Date::parse("2021-02-28"));
  CHECK(Date::parse("2019-01-31").plus_months_clamped(1) == Date::parse("2019-02-28"));
}

TEST_CASE("month arithmetic oracle: manual calendar walk over month ends") {
  auto days_in_month = [](int year, unsigned month) -> unsigned {
    static const unsigned kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
  };
  for (unsigned day : {28u, 29u, 30u, 31u}) {
    for (int months = 1; months <= 24; ++months) {
      Date start = Date::from_ymd(2018, 1, day);
      int target_month0 = months % 12;
      int target_year = 2018 + months / 12;
      unsigned clamped =
          std::min(day, days_in_month(target_year, static_cast<unsigned>(target_month0 + 1)));
      Date expected =
          Date::from_ymd(target_year, static_cast<unsigned>(target_month0 + 1), clamped);
      CHECK(start.plus_months_clamped(months) == expected);
    }
  }
}
