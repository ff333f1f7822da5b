#include "airway/validation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

namespace airway {
namespace {

constexpr std::array<std::string_view, 22> kIdentityFields = {
    "name",          "patient_name", "first_name",   "last_name",     "full_name",
    "given_name",    "family_name",  "surname",      "address",       "street",
    "home_address",  "street_address", "birthdate",  "birth_date",    "date_of_birth",
    "dob",           "ssn",          "phone",        "phone_number",  "email",
    "mrn",           "medical_record_number",
};

Rejection schema(std::string reason) { return {ErrorCode::schema_violation, std::move(reason)}; }

bool finite(double v) { return std::isfinite(v); }

std::optional<Rejection> find_identity_key(const json& j, const std::string& path) {
  if (j.is_object()) {
    for (auto& [k, v] : j.items()) {
      std::string here = path.empty() ? k : path + "." + k;
      if (is_identity_field(k)) {
        return Rejection{ErrorCode::identity_leak,
                         fmt::format("identity-bearing field '{}' is not accepted", here)};
      }
      if (auto r = find_identity_key(v, here)) return r;
    }
  } else if (j.is_array()) {
    for (auto& v : j) {
      if (auto r = find_identity_key(v, path)) return r;
    }
  }
  return std::nullopt;
}

struct InvariantCheck {
  std::optional<Rejection> operator()(const QuestionnaireResponse& q) const {
    if (q.patient_id.empty()) return schema("questionnaire: empty patient_id");
    if (q.rescue) {
      if (q.rescue->count < 0 || q.rescue->count > 6) {
        return schema(fmt::format("questionnaire: rescue_count {} outside 0..6", q.rescue->count));
      }
      if (q.rescue->saturated && q.rescue->count != 6) {
        return schema("questionnaire: saturated rescue answer must have count 6");
      }
    }
    if (q.slot == Slot::daily) {
      if (!q.symptoms.empty() || q.rescue || q.controller_taken) {
        return schema("questionnaire: symptoms and medication belong to morning/evening slots");
      }
    } else if (q.activity_limitation || q.night_awakening) {
      return schema("questionnaire: activity limitation and night awakening belong to the daily slot");
    }
    return std::nullopt;
  }
  std::optional<Rejection> operator()(const LungFunctionReading& r) const {
    if (r.patient_id.empty()) return schema("lung: empty patient_id");
    if (!finite(r.pef) || r.pef <= 0) return schema(fmt::format("lung: pef {} must be > 0", r.pef));
    if (!finite(r.fev1) || r.fev1 <= 0) {
      return schema(fmt::format("lung: fev1 {} must be > 0", r.fev1));
    }
    return std::nullopt;
  }
  std::optional<Rejection> operator()(const EnvironmentSample& s) const {
    if (s.region.empty()) return schema("outdoor_env: empty region");
    if (!finite(s.value)) return schema("outdoor_env: value must be finite");
    switch (s.parameter) {
      case EnvParameter::pollen:
      case EnvParameter::pm25:
      case EnvParameter::ozone:
        if (s.value < 0) {
          return schema(fmt::format("outdoor_env: {} {} must be >= 0", to_string(s.parameter),
                                    s.value));
        }
        break;
      case EnvParameter::humidity:
        if (s.value < 0 || s.value > 100) {
          return schema(fmt::format("outdoor_env: humidity {} outside [0, 100]", s.value));
        }
        break;
      case EnvParameter::temperature:
        break;
    }
    return std::nullopt;
  }
  std::optional<Rejection> operator()(const IndoorAirSample& s) const {
    if (s.patient_id.empty()) return schema("indoor_env: empty patient_id");
    if (!finite(s.temperature)) return schema("indoor_env: temperature must be finite");
    for (double v : {s.humidity, s.particulate_matter, s.voc, s.co2, s.global_pollution_index}) {
      if (!finite(v) || v < 0) return schema("indoor_env: readings must be >= 0");
    }
    return std::nullopt;
  }
  std::optional<Rejection> operator()(const ActivitySleepSample& s) const {
    if (s.patient_id.empty()) return schema("activity_sleep: empty patient_id");
    if (s.steps < 0) return schema("activity_sleep: steps must be >= 0");
    if (s.sleep_minutes < 0 || s.sleep_minutes > 1440) {
      return schema("activity_sleep: sleep_minutes outside [0, 1440]");
    }
    return std::nullopt;
  }
  std::optional<Rejection> operator()(const MedicationEvent& e) const {
    if (e.patient_id.empty()) return schema("medication_event: empty patient_id");
    if (e.medication.empty()) return schema("medication_event: empty medication name");
    return std::nullopt;
  }
};

}  // namespace

bool is_identity_field(std::string_view key) {
  std::string lowered(key);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  return std::find(kIdentityFields.begin(), kIdentityFields.end(), lowered) !=
         kIdentityFields.end();
}

std::optional<Rejection> check_invariants(const Observation& obs) {
  if (stream_of(obs.payload) != obs.stream) {
    return schema(fmt::format("payload type {} does not match stream {}",
                              to_string(stream_of(obs.payload)), to_string(obs.stream)));
  }
  return std::visit(InvariantCheck{}, obs.payload);
}

ValidationResult validate_observation(const Observation& obs) {
  if (auto r = check_invariants(obs)) return *r;
  return obs;
}

ValidationResult validate_observation(const json& wire, Timestamp default_received_at) {
  if (!wire.is_object()) return schema("observation must be a JSON object");
  if (auto leak = find_identity_key(wire, "")) return *leak;

  auto stream_it = wire.find("stream");
  if (stream_it == wire.end() || !stream_it->is_string()) {
    return Rejection{ErrorCode::unknown_stream, "missing 'stream'"};
  }
  auto stream = parse_stream(stream_it->get<std::string>());
  if (!stream) {
    return Rejection{ErrorCode::unknown_stream,
                     fmt::format("unknown stream '{}'", stream_it->get<std::string>())};
  }
  for (auto& [k, _] : wire.items()) {
    if (k != "stream" && k != "payload" && k != "received_at" && k != "key") {
      return schema(fmt::format("unknown envelope field '{}'", k));
    }
  }

  try {
    auto payload_it = wire.find("payload");
    if (payload_it == wire.end()) return schema("missing 'payload'");
    Observation obs{*stream, payload_from_json(*stream, *payload_it), default_received_at};
    if (auto it = wire.find("received_at"); it != wire.end() && !it->is_null()) {
      if (!it->is_string()) return schema("'received_at' must be a string");
      try {
        obs.received_at = parse_timestamp(it->get<std::string>());
      } catch (const std::invalid_argument& e) {
        return schema(e.what());
      }
    }
    if (auto r = check_invariants(obs)) return *r;
    if (auto it = wire.find("key"); it != wire.end() && !it->is_null()) {
      if (!it->is_string() || it->get<std::string>() != obs.key().str()) {
        return schema(fmt::format("'key' {} does not match payload key {}", it->dump(),
                                  obs.key().str()));
      }
    }
    return obs;
  } catch (const Error& e) {
    return Rejection{e.code(), e.what()};
  }
}

ValidationResult validate_line(std::string_view line, Timestamp default_received_at) {
  json wire = json::parse(line.begin(), line.end(), nullptr, false);
  if (wire.is_discarded()) return schema("line is not valid JSON");
  return validate_observation(wire, default_received_at);
}

void check_profile(const PatientProfile& p) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::schema_violation, why); };
  if (p.patient_id.empty()) fail("profile: empty patient_id");
  if (p.region.empty()) fail("profile: empty region");
  if (!(p.deployment_start < p.deployment_end)) {
    fail("profile: deployment_start must precede deployment_end");
  }
  if (p.rescue_meds.empty() || p.controller_meds.empty()) {
    fail("profile: rescue and controller medication lists must be non-empty");
  }
  if (p.enrollment_months != 1 && p.enrollment_months != 3) {
    fail("profile: enrollment_months must be 1 or 3");
  }
}

}  // namespace airway
