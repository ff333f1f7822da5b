#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace airway {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Parses an RFC 3339 timestamp ("2018-01-15T13:00:00Z", fractional seconds
/// and numeric offsets accepted). Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Always emits UTC with a trailing 'Z' and whole seconds.
std::string format_timestamp(Timestamp ts);

Date parse_date(std::string_view text);
std::string format_date(Date date);

inline Date add_days(Date date, int n) { return date + std::chrono::days{n}; }

inline int days_between(Date from, Date to) {
  return static_cast<int>((to - from).count());
}

inline Timestamp start_of(Date date) { return Timestamp{date.time_since_epoch()}; }

/// Inclusive calendar-day range.
struct DateRange {
  Date first;
  Date last;

  int days() const { return days_between(first, last) + 1; }
  bool empty() const { return last < first; }
  bool contains(Date d) const { return first <= d && d <= last; }

  friend bool operator==(const DateRange&, const DateRange&) = default;
};

/// Fixed UTC offset used to map instants to the local calendar day shared by
/// a patient and their region.
struct LocalClock {
  std::chrono::minutes utc_offset{0};

  Date day_of(Timestamp ts) const {
    return std::chrono::floor<std::chrono::days>(ts + utc_offset);
  }
  Timestamp day_start(Date date) const { return start_of(date) - utc_offset; }
};

}  // namespace airway
