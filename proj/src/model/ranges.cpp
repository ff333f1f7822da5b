#include "airway/ranges.hpp"

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::identity_leak: return "IdentityLeak";
    case ErrorCode::unknown_stream: return "UnknownStream";
    case ErrorCode::unauthorized: return "Unauthorized";
    case ErrorCode::storage_unavailable: return "StorageUnavailable";
    case ErrorCode::batch_too_large: return "BatchTooLarge";
    case ErrorCode::store_corruption: return "StoreCorruption";
    case ErrorCode::unknown_patient: return "UnknownPatient";
    case ErrorCode::unanswered_day: return "UnansweredDay";
    case ErrorCode::empty_period: return "EmptyPeriod";
    case ErrorCode::insufficient_episodes: return "InsufficientEpisodes";
    case ErrorCode::no_healthy_range: return "NoHealthyRange";
    case ErrorCode::empty_cohort: return "EmptyCohort";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::adapter_unavailable: return "AdapterUnavailable";
    case ErrorCode::adapter_parse_error: return "AdapterParseError";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "Unknown";
}

std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::pollen: return "pollen";
    case Trigger::pm25: return "pm25";
    case Trigger::ozone: return "ozone";
  }
  return "?";
}

std::string_view display_name(Trigger t) {
  switch (t) {
    case Trigger::pollen: return "Pollen";
    case Trigger::pm25: return "PM2.5";
    case Trigger::ozone: return "Ozone";
  }
  return "?";
}

std::optional<Trigger> parse_trigger(std::string_view s) {
  for (auto t : kAllTriggers) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

EnvParameter parameter_of(Trigger t) {
  switch (t) {
    case Trigger::pollen: return EnvParameter::pollen;
    case Trigger::pm25: return EnvParameter::pm25;
    case Trigger::ozone: return EnvParameter::ozone;
  }
  return EnvParameter::pollen;
}

std::optional<Trigger> trigger_of(EnvParameter p) {
  switch (p) {
    case EnvParameter::pollen: return Trigger::pollen;
    case EnvParameter::pm25: return Trigger::pm25;
    case EnvParameter::ozone: return Trigger::ozone;
    default: return std::nullopt;
  }
}

HealthyRanges::HealthyRanges()
    : ranges_{{{EnvParameter::pollen, 0.0, 2.4},
               {EnvParameter::pm25, 0.0, 50.0},
               {EnvParameter::ozone, 0.0, 50.0}}} {}

void HealthyRanges::set(Trigger t, double lower, double upper) {
  if (!(lower <= upper)) {
    throw Error(ErrorCode::config_error,
                fmt::format("healthy range for {} has lower {} > upper {}", to_string(t),
                            lower, upper));
  }
  ranges_[static_cast<std::size_t>(t)] = {parameter_of(t), lower, upper};
}

bool HealthyRanges::unhealthy(EnvParameter parameter, double value) const {
  auto t = trigger_of(parameter);
  if (!t) {
    throw Error(ErrorCode::no_healthy_range,
                fmt::format("{} has no healthy range; it is context only", to_string(parameter)));
  }
  return unhealthy(*t, value);
}

}  // namespace airway
