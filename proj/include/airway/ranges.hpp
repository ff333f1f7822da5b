#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "airway/model.hpp"

namespace airway {

/// Environmental parameters that can be attributed. Enumerator order is the
/// tie-break order for ranking.
enum class Trigger { pollen, pm25, ozone };
inline constexpr std::size_t kTriggerCount = 3;
inline constexpr std::array<Trigger, kTriggerCount> kAllTriggers = {Trigger::pollen,
                                                                     Trigger::pm25,
                                                                     Trigger::ozone};

std::string_view to_string(Trigger t);
std::optional<Trigger> parse_trigger(std::string_view s);
EnvParameter parameter_of(Trigger t);
std::optional<Trigger> trigger_of(EnvParameter p);

/// Display label as used in tables ("Pollen", "PM2.5", "Ozone").
std::string_view display_name(Trigger t);

struct HealthyRange {
  EnvParameter parameter = EnvParameter::pollen;
  double lower = 0;
  double upper = 0;

  bool contains(double value) const { return lower <= value && value <= upper; }

  friend bool operator==(const HealthyRange&, const HealthyRange&) = default;
};

/// Healthy bands for the attributable parameters. Defaults: pollen index
/// [0, 2.4], PM2.5 AQI [0, 50], ozone AQI [0, 50].
class HealthyRanges {
 public:
  HealthyRanges();

  const HealthyRange& of(Trigger t) const { return ranges_[static_cast<std::size_t>(t)]; }
  /// Throws Error{config_error} when lower > upper.
  void set(Trigger t, double lower, double upper);

  /// True iff the value lies outside the healthy band. Temperature and
  /// humidity have no band and raise Error{no_healthy_range}.
  bool unhealthy(EnvParameter parameter, double value) const;
  bool unhealthy(Trigger t, double value) const { return !of(t).contains(value); }

  friend bool operator==(const HealthyRanges&, const HealthyRanges&) = default;

 private:
  std::array<HealthyRange, kTriggerCount> ranges_;
};

}  // namespace airway
