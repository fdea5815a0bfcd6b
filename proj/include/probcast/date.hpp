#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace probcast {

/// Proleptic Gregorian calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  static Date from_ymd(int year, int month, int day);
  static constexpr Date from_days(std::int64_t days) { return Date(days); }
  /// Parses "YYYY-MM-DD"; throws DataError on malformed input.
  static Date parse(std::string_view text);

  constexpr std::int64_t days() const { return days_; }
  int year() const;
  int month() const;
  int day() const;
  /// 0 = Monday ... 6 = Sunday.
  int weekday() const;
  std::string to_string() const;

  constexpr Date operator+(std::int64_t n) const { return Date(days_ + n); }
  constexpr Date operator-(std::int64_t n) const { return Date(days_ - n); }
  constexpr std::int64_t operator-(Date other) const { return days_ - other.days_; }
  constexpr auto operator<=>(const Date&) const = default;

 private:
  constexpr explicit Date(std::int64_t days) : days_(days) {}
  std::int64_t days_ = 0;
};

/// Inclusive date interval.
struct DateRange {
  Date first;
  Date last;
  bool contains(Date d) const { return first <= d && d <= last; }
};

/// Local wall-clock time at hourly resolution.
struct LocalHour {
  Date date;
  int hour = 0;  // 0..23
  auto operator<=>(const LocalHour&) const = default;
};

/// Parses ISO-8601 local timestamps: "YYYY-MM-DD HH:MM[:SS]" or with 'T'.
/// A trailing UTC offset ("+01:00", "Z") is accepted and ignored.
LocalHour parse_timestamp(std::string_view text);
std::string format_timestamp(const LocalHour& t);

enum class DstRule { kNone, kEuropeBerlin };

std::optional<DstRule> parse_dst_rule(std::string_view name);
std::string to_string(DstRule rule);

/// Last Sunday of the given month.
Date last_sunday(int year, int month);

/// Day on which the local clock skips 02:00 (spring forward), if any.
bool is_spring_forward_day(Date d, DstRule rule);
/// Day on which the local hour 02:00 occurs twice (fall back), if any.
bool is_fall_back_day(Date d, DstRule rule);
/// Local hour affected by the transition (02:00 for Europe/Berlin).
inline constexpr int kDstTransitionHour = 2;

}  // namespace probcast
