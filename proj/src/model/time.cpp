#include "airway/time.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace airway {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) {
    throw std::invalid_argument(fmt::format("truncated date/time: '{}'", text));
  }
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw std::invalid_argument(fmt::format("malformed date/time: '{}'", text));
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument(fmt::format("malformed date/time: '{}'", text));
  }
}

Date checked_date(std::string_view text, int y, int m, int d) {
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw std::invalid_argument(fmt::format("invalid calendar date: '{}'", text));
  }
  return Date{ymd};
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10) {
    throw std::invalid_argument(fmt::format("expected YYYY-MM-DD: '{}'", text));
  }
  int y = read_int(text, 0, 4);
  expect(text, 4, '-');
  int m = read_int(text, 5, 2);
  expect(text, 7, '-');
  int d = read_int(text, 8, 2);
  return checked_date(text, y, m, d);
}

std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

Timestamp parse_timestamp(std::string_view text) {
  Date date = parse_date(text.substr(0, std::min<std::size_t>(10, text.size())));
  if (text.size() < 20 || (text[10] != 'T' && text[10] != 't' && text[10] != ' ')) {
    throw std::invalid_argument(fmt::format("expected RFC 3339 timestamp: '{}'", text));
  }
  int hh = read_int(text, 11, 2);
  expect(text, 13, ':');
  int mm = read_int(text, 14, 2);
  expect(text, 16, ':');
  int ss = read_int(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw std::invalid_argument(fmt::format("time of day out of range: '{}'", text));
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) {
      throw std::invalid_argument(fmt::format("empty fraction: '{}'", text));
    }
  }
  std::chrono::minutes offset{0};
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    int sign = text[pos] == '-' ? -1 : 1;
    int oh = read_int(text, pos + 1, 2);
    expect(text, pos + 3, ':');
    int om = read_int(text, pos + 4, 2);
    offset = std::chrono::minutes{sign * (oh * 60 + om)};
    pos += 6;
  } else {
    throw std::invalid_argument(fmt::format("missing UTC offset: '{}'", text));
  }
  if (pos != text.size()) {
    throw std::invalid_argument(fmt::format("trailing characters: '{}'", text));
  }
  // Fractional seconds are truncated; the platform stores whole seconds.
  return start_of(date) + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss} - offset;
}

std::string format_timestamp(Timestamp ts) {
  auto day = std::chrono::floor<std::chrono::days>(ts);
  std::chrono::hh_mm_ss tod{ts - day};
  return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(Date{day}),
                     tod.hours().count(), tod.minutes().count(), tod.seconds().count());
}

}  // namespace airway
