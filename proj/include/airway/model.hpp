#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "airway/time.hpp"

namespace airway {

enum class Severity { mild, moderate, severe };

enum class Slot { morning, evening, daily };

/// Questionnaire symptoms. Detection treats them uniformly; the enumerator
/// order is the wire order, not a severity ranking.
enum class Symptom : std::uint8_t {
  cough,
  wheeze,
  chest_tightness,
  hard_fast_breathing,
  cant_talk_full_sentences,
  nose_opens_wide,
};
inline constexpr std::size_t kSymptomCount = 6;
inline constexpr std::array<Symptom, kSymptomCount> kAllSymptoms = {
    Symptom::cough,
    Symptom::wheeze,
    Symptom::chest_tightness,
    Symptom::hard_fast_breathing,
    Symptom::cant_talk_full_sentences,
    Symptom::nose_opens_wide,
};

class SymptomSet {
 public:
  constexpr SymptomSet() = default;
  constexpr explicit SymptomSet(std::uint8_t mask) : mask_(mask & 0x3F) {}
  SymptomSet(std::initializer_list<Symptom> symptoms) {
    for (auto s : symptoms) insert(s);
  }

  void insert(Symptom s) { mask_ |= bit(s); }
  bool contains(Symptom s) const { return (mask_ & bit(s)) != 0; }
  bool empty() const { return mask_ == 0; }
  std::uint8_t mask() const { return mask_; }
  SymptomSet operator|(SymptomSet other) const {
    return SymptomSet{static_cast<std::uint8_t>(mask_ | other.mask_)};
  }

  friend bool operator==(SymptomSet, SymptomSet) = default;

 private:
  static constexpr std::uint8_t bit(Symptom s) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s));
  }
  std::uint8_t mask_ = 0;
};

enum class ActivityLimitation { none, a_little, half_day, most_of_day };

enum class EnvParameter { pollen, pm25, ozone, temperature, humidity };
inline constexpr std::size_t kEnvParameterCount = 5;

enum class Stream {
  questionnaire,
  lung,
  outdoor_env,
  indoor_env,
  activity_sleep,
  medication_event,
};
inline constexpr std::array<Stream, 6> kAllStreams = {
    Stream::questionnaire, Stream::lung,           Stream::outdoor_env,
    Stream::indoor_env,    Stream::activity_sleep, Stream::medication_event,
};

enum class MedicationCategory { rescue, controller, oral_steroid };

struct PatientProfile {
  std::string patient_id;
  Severity severity = Severity::moderate;
  std::vector<std::string> rescue_meds;
  std::vector<std::string> controller_meds;
  std::optional<std::string> oral_steroid;
  std::string region;
  Date deployment_start;
  Date deployment_end;  // inclusive
  int enrollment_months = 1;

  DateRange deployment() const { return {deployment_start, deployment_end}; }

  friend bool operator==(const PatientProfile&, const PatientProfile&) = default;
};

/// "6+" answers are stored as count 6 with `saturated` set.
struct RescueCount {
  int count = 0;
  bool saturated = false;

  friend bool operator==(const RescueCount&, const RescueCount&) = default;
};

struct QuestionnaireResponse {
  std::string patient_id;
  Date date;
  Slot slot = Slot::morning;
  SymptomSet symptoms;
  std::optional<RescueCount> rescue;
  std::optional<bool> controller_taken;
  std::optional<ActivityLimitation> activity_limitation;
  std::optional<bool> night_awakening;

  friend bool operator==(const QuestionnaireResponse&, const QuestionnaireResponse&) = default;
};

struct LungFunctionReading {
  std::string patient_id;
  Timestamp timestamp;
  double pef = 0;   // L/min
  double fev1 = 0;  // L

  friend bool operator==(const LungFunctionReading&, const LungFunctionReading&) = default;
};

struct EnvironmentSample {
  std::string region;
  Timestamp timestamp;
  EnvParameter parameter = EnvParameter::pollen;
  double value = 0;

  friend bool operator==(const EnvironmentSample&, const EnvironmentSample&) = default;
};

struct IndoorAirSample {
  std::string patient_id;
  Timestamp timestamp;
  double temperature = 0;
  double humidity = 0;
  double particulate_matter = 0;
  double voc = 0;
  double co2 = 0;
  double global_pollution_index = 0;

  friend bool operator==(const IndoorAirSample&, const IndoorAirSample&) = default;
};

struct ActivitySleepSample {
  std::string patient_id;
  Date date;
  std::int64_t steps = 0;
  int sleep_minutes = 0;

  friend bool operator==(const ActivitySleepSample&, const ActivitySleepSample&) = default;
};

struct MedicationEvent {
  std::string patient_id;
  Timestamp timestamp;
  std::string medication;
  MedicationCategory category = MedicationCategory::rescue;

  friend bool operator==(const MedicationEvent&, const MedicationEvent&) = default;
};

/// Alternatives are ordered to match `Stream`.
using Payload = std::variant<QuestionnaireResponse, LungFunctionReading, EnvironmentSample,
                             IndoorAirSample, ActivitySleepSample, MedicationEvent>;

Stream stream_of(const Payload& payload);

/// Identifies an observation across re-sends. `subject` is the patient id,
/// or the region for outdoor environment samples; `discriminator` is the
/// questionnaire slot, environment parameter or medication name.
struct IdempotencyKey {
  std::string subject;
  Stream stream = Stream::questionnaire;
  Timestamp timestamp;
  std::string discriminator;

  std::string str() const;

  friend auto operator<=>(const IdempotencyKey&, const IdempotencyKey&) = default;
  friend bool operator==(const IdempotencyKey&, const IdempotencyKey&) = default;
};

struct Observation {
  Stream stream = Stream::questionnaire;
  Payload payload;
  Timestamp received_at;

  IdempotencyKey key() const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

Observation make_observation(Payload payload, Timestamp received_at);

// Names used on the wire.
std::string_view to_string(Severity v);
std::string_view to_string(Slot v);
std::string_view to_string(Symptom v);
std::string_view to_string(ActivityLimitation v);
std::string_view to_string(EnvParameter v);
std::string_view to_string(Stream v);
std::string_view to_string(MedicationCategory v);

std::optional<Severity> parse_severity(std::string_view s);
std::optional<Slot> parse_slot(std::string_view s);
std::optional<Symptom> parse_symptom(std::string_view s);
std::optional<ActivityLimitation> parse_activity_limitation(std::string_view s);
std::optional<EnvParameter> parse_env_parameter(std::string_view s);
std::optional<Stream> parse_stream(std::string_view s);
std::optional<MedicationCategory> parse_medication_category(std::string_view s);

}  // namespace airway
