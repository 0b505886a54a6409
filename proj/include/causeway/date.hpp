#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace causeway {

/// Calendar date (UTC day), stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  constexpr explicit Date(std::int64_t days) : days_(days) {}

  static Date from_ymd(int year, int month, int day);

  /// Accepts "YYYY-MM-DD" or a full ISO-8601 timestamp (extra characters
  /// after the date part are ignored). Returns nullopt on malformed input.
  static std::optional<Date> parse(std::string_view text);

  std::int64_t days() const { return days_; }
  void to_ymd(int& year, int& month, int& day) const;
  std::string to_string() const;  // YYYY-MM-DD

  /// Calendar-month arithmetic; day-of-month clamped to the target month's
  /// last day (2018-01-31 + 1 month = 2018-02-28).
  Date add_months(int n) const;
  Date add_days(std::int64_t n) const { return Date(days_ + n); }

  static int days_in_month(int year, int month);

  auto operator<=>(const Date&) const = default;

 private:
  std::int64_t days_ = 0;
};

}  // namespace causeway
