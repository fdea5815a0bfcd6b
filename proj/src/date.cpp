#include "probcast/date.hpp"

#include "probcast/common.hpp"

#include <charconv>
#include <cstdio>

namespace probcast {
namespace {

// Days-from-civil and its inverse (Hinnant's algorithms).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  int y;
  unsigned m;
  unsigned d;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), m, d};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

int parse_int(std::string_view s, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("malformed date/time '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
    throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                    std::to_string(month) + "-" + std::to_string(day));
  }
  return Date(days_from_civil(year, static_cast<unsigned>(month),
                              static_cast<unsigned>(day)));
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("malformed date '" + std::string(text) + "'");
  }
  return from_ymd(parse_int(text.substr(0, 4), text), parse_int(text.substr(5, 2), text),
                  parse_int(text.substr(8, 2), text));
}

int Date::year() const { return civil_from_days(days_).y; }
int Date::month() const { return static_cast<int>(civil_from_days(days_).m); }
int Date::day() const { return static_cast<int>(civil_from_days(days_).d); }

int Date::weekday() const {
  // 1970-01-01 was a Thursday (index 3).
  const std::int64_t w = (days_ + 3) % 7;
  return static_cast<int>(w < 0 ? w + 7 : w);
}

std::string Date::to_string() const {
  const Civil c = civil_from_days(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.y, c.m, c.d);
  return buf;
}

LocalHour parse_timestamp(std::string_view text) {
  if (text.size() < 13 || (text[10] != 'T' && text[10] != ' ')) {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  LocalHour t;
  t.date = Date::parse(text.substr(0, 10));
  t.hour = parse_int(text.substr(11, 2), text);
  std::string_view rest = text.substr(13);
  if (rest.size() >= 3 && rest[0] == ':') {
    if (parse_int(rest.substr(1, 2), text) != 0) {
      throw DataError("timestamp not on the hour '" + std::string(text) + "'");
    }
    rest = rest.substr(3);
    if (rest.size() >= 3 && rest[0] == ':') rest = rest.substr(3);
  }
  if (!(rest.empty() || rest == "Z" || rest[0] == '+' || rest[0] == '-')) {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  if (t.hour < 0 || t.hour > 23) {
    throw DataError("hour out of range in '" + std::string(text) + "'");
  }
  return t;
}

std::string format_timestamp(const LocalHour& t) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "T%02d:00", t.hour);
  return t.date.to_string() + buf;
}

std::optional<DstRule> parse_dst_rule(std::string_view name) {
  if (name == "Europe/Berlin") return DstRule::kEuropeBerlin;
  if (name == "none" || name == "UTC") return DstRule::kNone;
  return std::nullopt;
}

std::string to_string(DstRule rule) {
  return rule == DstRule::kEuropeBerlin ? "Europe/Berlin" : "none";
}

Date last_sunday(int year, int month) {
  Date d = Date::from_ymd(year, month, days_in_month(year, month));
  return d - ((d.weekday() + 1) % 7);
}

bool is_spring_forward_day(Date d, DstRule rule) {
  return rule == DstRule::kEuropeBerlin && d.month() == 3 && d == last_sunday(d.year(), 3);
}

bool is_fall_back_day(Date d, DstRule rule) {
  return rule == DstRule::kEuropeBerlin && d.month() == 10 && d == last_sunday(d.year(), 10);
}

}  // namespace probcast
