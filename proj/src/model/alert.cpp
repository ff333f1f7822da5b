#include "airway/alert.hpp"

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

std::string_view to_string(AlertKind k) {
  switch (k) {
    case AlertKind::trigger_forecast: return "trigger_forecast";
    case AlertKind::medication_reminder: return "medication_reminder";
    case AlertKind::clinician_flag: return "clinician_flag";
  }
  return "?";
}

std::string_view to_string(Audience a) {
  return a == Audience::patient ? "patient" : "clinician";
}

std::string Alert::key() const {
  return fmt::format("{}/{}/{}/{}", patient_id, format_date(date), to_string(kind), detail);
}

json alert_to_json(const Alert& a) {
  return {{"patient_id", a.patient_id},
          {"kind", std::string{to_string(a.kind)}},
          {"date", format_date(a.date)},
          {"detail", a.detail},
          {"audience", std::string{to_string(a.audience)}}};
}

Alert alert_from_json(const json& j) {
  try {
    Alert a;
    a.patient_id = j.at("patient_id").get<std::string>();
    auto kind = j.at("kind").get<std::string>();
    if (kind == "trigger_forecast") a.kind = AlertKind::trigger_forecast;
    else if (kind == "medication_reminder") a.kind = AlertKind::medication_reminder;
    else if (kind == "clinician_flag") a.kind = AlertKind::clinician_flag;
    else throw Error(ErrorCode::schema_violation, fmt::format("unknown alert kind '{}'", kind));
    a.date = parse_date(j.at("date").get<std::string>());
    a.detail = j.at("detail").get<std::string>();
    a.audience = j.at("audience").get<std::string>() == "clinician" ? Audience::clinician
                                                                    : Audience::patient;
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema_violation, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::schema_violation, e.what());
  }
}

}  // namespace airway
