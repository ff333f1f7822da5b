#include "airway/season.hpp"

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

using std::chrono::month_day;
using namespace std::chrono_literals;

std::string_view to_string(Season s) {
  switch (s) {
    case Season::winter: return "winter";
    case Season::spring: return "spring";
    case Season::summer: return "summer";
    case Season::fall: return "fall";
  }
  return "?";
}

std::optional<Season> parse_season(std::string_view s) {
  for (auto season : kAllSeasons) {
    if (to_string(season) == s) return season;
  }
  return std::nullopt;
}

bool SeasonInterval::contains(month_day md) const {
  if (first <= last) return first <= md && md <= last;
  return md >= first || md <= last;
}

SeasonConfig::SeasonConfig()
    : intervals_{{
          {month_day{std::chrono::December, 1d}, month_day{std::chrono::February, 29d}},
          {month_day{std::chrono::March, 1d}, month_day{std::chrono::May, 31d}},
          {month_day{std::chrono::June, 1d}, month_day{std::chrono::August, 31d}},
          {month_day{std::chrono::September, 1d}, month_day{std::chrono::November, 30d}},
      }} {}

SeasonConfig::SeasonConfig(std::array<SeasonInterval, 4> intervals) : intervals_(intervals) {
  validate();
}

void SeasonConfig::validate() const {
  for (auto& iv : intervals_) {
    if (!iv.first.ok() || !iv.last.ok()) {
      throw Error(ErrorCode::config_error, "season interval has an invalid month/day");
    }
  }
  // Walk a leap year so Feb 29 is covered too.
  Date d{std::chrono::year{2020} / std::chrono::January / 1};
  for (int i = 0; i < 366; ++i, d = add_days(d, 1)) {
    std::chrono::year_month_day ymd{d};
    month_day md{ymd.month(), ymd.day()};
    int owners = 0;
    for (auto& iv : intervals_) owners += iv.contains(md) ? 1 : 0;
    if (owners != 1) {
      throw Error(ErrorCode::config_error,
                  fmt::format("season intervals do not partition the year: {:02d}-{:02d} is "
                              "covered {} times",
                              static_cast<unsigned>(ymd.month()),
                              static_cast<unsigned>(ymd.day()), owners));
    }
  }
}

Season SeasonConfig::season_of(Date date) const {
  std::chrono::year_month_day ymd{date};
  month_day md{ymd.month(), ymd.day()};
  for (auto s : kAllSeasons) {
    if (interval(s).contains(md)) return s;
  }
  return Season::winter;  // unreachable for a validated config
}

}  // namespace airway
