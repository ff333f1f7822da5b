#include "airway/model.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace airway {
namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view s) {
  auto it = std::find_if(table.begin(), table.end(), [&](auto& e) { return e.second == s; });
  if (it == table.end()) return std::nullopt;
  return it->first;
}

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table,
                         Enum v) {
  for (auto& [e, name] : table) {
    if (e == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Severity, std::string_view>, 3> kSeverityNames{{
    {Severity::mild, "mild"},
    {Severity::moderate, "moderate"},
    {Severity::severe, "severe"},
}};
constexpr std::array<std::pair<Slot, std::string_view>, 3> kSlotNames{{
    {Slot::morning, "morning"},
    {Slot::evening, "evening"},
    {Slot::daily, "daily"},
}};
constexpr std::array<std::pair<Symptom, std::string_view>, 6> kSymptomNames{{
    {Symptom::cough, "cough"},
    {Symptom::wheeze, "wheeze"},
    {Symptom::chest_tightness, "chest_tightness"},
    {Symptom::hard_fast_breathing, "hard_fast_breathing"},
    {Symptom::cant_talk_full_sentences, "cant_talk_full_sentences"},
    {Symptom::nose_opens_wide, "nose_opens_wide"},
}};
constexpr std::array<std::pair<ActivityLimitation, std::string_view>, 4> kActivityNames{{
    {ActivityLimitation::none, "none"},
    {ActivityLimitation::a_little, "a_little"},
    {ActivityLimitation::half_day, "half_day"},
    {ActivityLimitation::most_of_day, "most_of_day"},
}};
constexpr std::array<std::pair<EnvParameter, std::string_view>, 5> kParameterNames{{
    {EnvParameter::pollen, "pollen"},
    {EnvParameter::pm25, "pm25"},
    {EnvParameter::ozone, "ozone"},
    {EnvParameter::temperature, "temperature"},
    {EnvParameter::humidity, "humidity"},
}};
constexpr std::array<std::pair<Stream, std::string_view>, 6> kStreamNames{{
    {Stream::questionnaire, "questionnaire"},
    {Stream::lung, "lung"},
    {Stream::outdoor_env, "outdoor_env"},
    {Stream::indoor_env, "indoor_env"},
    {Stream::activity_sleep, "activity_sleep"},
    {Stream::medication_event, "medication_event"},
}};
constexpr std::array<std::pair<MedicationCategory, std::string_view>, 3> kCategoryNames{{
    {MedicationCategory::rescue, "rescue"},
    {MedicationCategory::controller, "controller"},
    {MedicationCategory::oral_steroid, "oral_steroid"},
}};

}  // namespace

std::string_view to_string(Severity v) { return name_of(kSeverityNames, v); }
std::string_view to_string(Slot v) { return name_of(kSlotNames, v); }
std::string_view to_string(Symptom v) { return name_of(kSymptomNames, v); }
std::string_view to_string(ActivityLimitation v) { return name_of(kActivityNames, v); }
std::string_view to_string(EnvParameter v) { return name_of(kParameterNames, v); }
std::string_view to_string(Stream v) { return name_of(kStreamNames, v); }
std::string_view to_string(MedicationCategory v) { return name_of(kCategoryNames, v); }

std::optional<Severity> parse_severity(std::string_view s) { return lookup(kSeverityNames, s); }
std::optional<Slot> parse_slot(std::string_view s) { return lookup(kSlotNames, s); }
std::optional<Symptom> parse_symptom(std::string_view s) { return lookup(kSymptomNames, s); }
std::optional<ActivityLimitation> parse_activity_limitation(std::string_view s) {
  return lookup(kActivityNames, s);
}
std::optional<EnvParameter> parse_env_parameter(std::string_view s) {
  return lookup(kParameterNames, s);
}
std::optional<Stream> parse_stream(std::string_view s) { return lookup(kStreamNames, s); }
std::optional<MedicationCategory> parse_medication_category(std::string_view s) {
  return lookup(kCategoryNames, s);
}

Stream stream_of(const Payload& payload) { return kAllStreams.at(payload.index()); }

std::string IdempotencyKey::str() const {
  return fmt::format("{}/{}/{}/{}", subject, to_string(stream), format_timestamp(timestamp),
                     discriminator);
}

IdempotencyKey Observation::key() const {
  struct Visitor {
    Stream stream;
    IdempotencyKey operator()(const QuestionnaireResponse& q) const {
      return {q.patient_id, stream, start_of(q.date), std::string{to_string(q.slot)}};
    }
    IdempotencyKey operator()(const LungFunctionReading& r) const {
      return {r.patient_id, stream, r.timestamp, {}};
    }
    IdempotencyKey operator()(const EnvironmentSample& s) const {
      return {s.region, stream, s.timestamp, std::string{to_string(s.parameter)}};
    }
    IdempotencyKey operator()(const IndoorAirSample& s) const {
      return {s.patient_id, stream, s.timestamp, {}};
    }
    IdempotencyKey operator()(const ActivitySleepSample& s) const {
      return {s.patient_id, stream, start_of(s.date), {}};
    }
    IdempotencyKey operator()(const MedicationEvent& e) const {
      return {e.patient_id, stream, e.timestamp, e.medication};
    }
  };
  return std::visit(Visitor{stream}, payload);
}

Observation make_observation(Payload payload, Timestamp received_at) {
  Stream s = stream_of(payload);
  return Observation{s, std::move(payload), received_at};
}

}  // namespace airway
