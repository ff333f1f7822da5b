#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "airway/codec.hpp"
#include "airway/time.hpp"

namespace airway {

enum class AlertKind { trigger_forecast, medication_reminder, clinician_flag };
enum class Audience { patient, clinician };

std::string_view to_string(AlertKind k);
std::string_view to_string(Audience a);

struct Alert {
  std::string patient_id;
  AlertKind kind = AlertKind::trigger_forecast;
  Date date;
  std::string detail;  // trigger name, medication name or reason
  Audience audience = Audience::patient;

  /// Dedup identity: (patient, kind, detail, date).
  std::string key() const;

  friend bool operator==(const Alert&, const Alert&) = default;
};

json alert_to_json(const Alert& alert);
/// Throws Error{schema_violation}.
Alert alert_from_json(const json& j);

}  // namespace airway
