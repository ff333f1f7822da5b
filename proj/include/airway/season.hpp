#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string_view>

#include "airway/time.hpp"

namespace airway {

enum class Season { winter, spring, summer, fall };
inline constexpr std::array<Season, 4> kAllSeasons = {Season::winter, Season::spring,
                                                      Season::summer, Season::fall};

std::string_view to_string(Season s);
std::optional<Season> parse_season(std::string_view s);

/// Inclusive month/day interval; wraps past Dec 31 when `first` > `last`.
struct SeasonInterval {
  std::chrono::month_day first;
  std::chrono::month_day last;

  bool contains(std::chrono::month_day md) const;
};

/// Season boundaries. Defaults are meteorological: winter Dec 1 to Feb 29,
/// spring Mar 1 to May 31, summer Jun 1 to Aug 31, fall Sep 1 to Nov 30.
class SeasonConfig {
 public:
  SeasonConfig();

  /// Throws Error{config_error} unless the intervals partition the year.
  SeasonConfig(std::array<SeasonInterval, 4> intervals);

  const SeasonInterval& interval(Season s) const {
    return intervals_[static_cast<std::size_t>(s)];
  }
  Season season_of(Date date) const;

 private:
  void validate() const;

  std::array<SeasonInterval, 4> intervals_;
};

}  // namespace airway
