#include "airway/codec.hpp"

#include <set>

#include <fmt/format.h>

#include "airway/error.hpp"
#include "airway/validation.hpp"

namespace airway {
namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::schema_violation, what);
}

/// Strict field reader: records which keys were consumed so leftovers can be
/// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string_view context) : j_(j), context_(context) {
    if (!j.is_object()) schema_error(fmt::format("{}: expected a JSON object", context_));
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& require(const char* key) {
    auto* v = find(key);
    if (!v) schema_error(fmt::format("{}: missing field '{}'", context_, key));
    return *v;
  }

  std::string string(const char* key) {
    auto& v = require(key);
    if (!v.is_string()) schema_error(fmt::format("{}: '{}' must be a string", context_, key));
    return v.get<std::string>();
  }

  double number(const char* key) {
    auto& v = require(key);
    if (!v.is_number()) schema_error(fmt::format("{}: '{}' must be a number", context_, key));
    return v.get<double>();
  }

  std::int64_t integer(const char* key) {
    auto& v = require(key);
    if (!v.is_number_integer()) {
      schema_error(fmt::format("{}: '{}' must be an integer", context_, key));
    }
    return v.get<std::int64_t>();
  }

  std::optional<bool> optional_bool(const char* key) {
    auto* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) schema_error(fmt::format("{}: '{}' must be a boolean", context_, key));
    return v->get<bool>();
  }

  Timestamp timestamp(const char* key) {
    auto s = string(key);
    try {
      return parse_timestamp(s);
    } catch (const std::invalid_argument& e) {
      schema_error(fmt::format("{}: {}", context_, e.what()));
    }
  }

  Date date(const char* key) {
    auto s = string(key);
    try {
      return parse_date(s);
    } catch (const std::invalid_argument& e) {
      schema_error(fmt::format("{}: {}", context_, e.what()));
    }
  }

  template <typename Enum, typename Parse>
  Enum enumeration(const char* key, Parse parse) {
    auto s = string(key);
    auto v = parse(s);
    if (!v) schema_error(fmt::format("{}: unknown {} '{}'", context_, key, s));
    return *v;
  }

  void finish() const {
    for (auto& [k, _] : j_.items()) {
      if (!seen_.count(k)) schema_error(fmt::format("{}: unknown field '{}'", context_, k));
    }
  }

 private:
  const json& j_;
  std::string_view context_;
  std::set<std::string, std::less<>> seen_;
};

QuestionnaireResponse questionnaire_from_json(const json& j) {
  Reader r{j, "questionnaire"};
  QuestionnaireResponse q;
  q.patient_id = r.string("patient_id");
  q.date = r.date("date");
  q.slot = r.enumeration<Slot>("slot", parse_slot);
  if (auto* s = r.find("symptoms")) {
    if (!s->is_array()) schema_error("questionnaire: 'symptoms' must be an array");
    for (auto& item : *s) {
      if (!item.is_string()) schema_error("questionnaire: symptom must be a string");
      auto sym = parse_symptom(item.get<std::string>());
      if (!sym) schema_error(fmt::format("questionnaire: unknown symptom {}", item.dump()));
      q.symptoms.insert(*sym);
    }
  }
  if (auto* rc = r.find("rescue_count")) {
    RescueCount count;
    if (rc->is_string() && rc->get<std::string>() == "6+") {
      count = {6, true};
    } else if (rc->is_number_integer()) {
      count.count = static_cast<int>(rc->get<std::int64_t>());
    } else {
      schema_error("questionnaire: 'rescue_count' must be an integer or \"6+\"");
    }
    if (auto sat = r.optional_bool("rescue_saturated")) count.saturated = count.saturated || *sat;
    q.rescue = count;
  } else if (r.find("rescue_saturated")) {
    schema_error("questionnaire: 'rescue_saturated' without 'rescue_count'");
  }
  q.controller_taken = r.optional_bool("controller_taken");
  if (r.find("activity_limitation")) {
    q.activity_limitation =
        r.enumeration<ActivityLimitation>("activity_limitation", parse_activity_limitation);
  }
  q.night_awakening = r.optional_bool("night_awakening");
  r.finish();
  return q;
}

LungFunctionReading lung_from_json(const json& j) {
  Reader r{j, "lung"};
  LungFunctionReading v;
  v.patient_id = r.string("patient_id");
  v.timestamp = r.timestamp("timestamp");
  v.pef = r.number("pef");
  v.fev1 = r.number("fev1");
  r.finish();
  return v;
}

EnvironmentSample env_from_json(const json& j) {
  Reader r{j, "outdoor_env"};
  EnvironmentSample v;
  v.region = r.string("region");
  v.timestamp = r.timestamp("timestamp");
  v.parameter = r.enumeration<EnvParameter>("parameter", parse_env_parameter);
  v.value = r.number("value");
  r.finish();
  return v;
}

IndoorAirSample indoor_from_json(const json& j) {
  Reader r{j, "indoor_env"};
  IndoorAirSample v;
  v.patient_id = r.string("patient_id");
  v.timestamp = r.timestamp("timestamp");
  v.temperature = r.number("temperature");
  v.humidity = r.number("humidity");
  v.particulate_matter = r.number("particulate_matter");
  v.voc = r.number("voc");
  v.co2 = r.number("co2");
  v.global_pollution_index = r.number("global_pollution_index");
  r.finish();
  return v;
}

ActivitySleepSample activity_from_json(const json& j) {
  Reader r{j, "activity_sleep"};
  ActivitySleepSample v;
  v.patient_id = r.string("patient_id");
  v.date = r.date("date");
  v.steps = r.integer("steps");
  v.sleep_minutes = static_cast<int>(r.integer("sleep_minutes"));
  r.finish();
  return v;
}

MedicationEvent medication_from_json(const json& j) {
  Reader r{j, "medication_event"};
  MedicationEvent v;
  v.patient_id = r.string("patient_id");
  v.timestamp = r.timestamp("timestamp");
  v.medication = r.string("medication");
  v.category = r.enumeration<MedicationCategory>("category", parse_medication_category);
  r.finish();
  return v;
}

json symptoms_to_json(SymptomSet set) {
  json arr = json::array();
  for (auto s : kAllSymptoms) {
    if (set.contains(s)) arr.push_back(to_string(s));
  }
  return arr;
}

struct PayloadEncoder {
  json operator()(const QuestionnaireResponse& q) const {
    json j{{"patient_id", q.patient_id},
           {"date", format_date(q.date)},
           {"slot", to_string(q.slot)},
           {"symptoms", symptoms_to_json(q.symptoms)}};
    if (q.rescue) {
      j["rescue_count"] = q.rescue->count;
      j["rescue_saturated"] = q.rescue->saturated;
    }
    if (q.controller_taken) j["controller_taken"] = *q.controller_taken;
    if (q.activity_limitation) j["activity_limitation"] = to_string(*q.activity_limitation);
    if (q.night_awakening) j["night_awakening"] = *q.night_awakening;
    return j;
  }
  json operator()(const LungFunctionReading& v) const {
    return {{"patient_id", v.patient_id},
            {"timestamp", format_timestamp(v.timestamp)},
            {"pef", v.pef},
            {"fev1", v.fev1}};
  }
  json operator()(const EnvironmentSample& v) const {
    return {{"region", v.region},
            {"timestamp", format_timestamp(v.timestamp)},
            {"parameter", to_string(v.parameter)},
            {"value", v.value}};
  }
  json operator()(const IndoorAirSample& v) const {
    return {{"patient_id", v.patient_id},
            {"timestamp", format_timestamp(v.timestamp)},
            {"temperature", v.temperature},
            {"humidity", v.humidity},
            {"particulate_matter", v.particulate_matter},
            {"voc", v.voc},
            {"co2", v.co2},
            {"global_pollution_index", v.global_pollution_index}};
  }
  json operator()(const ActivitySleepSample& v) const {
    return {{"patient_id", v.patient_id},
            {"date", format_date(v.date)},
            {"steps", v.steps},
            {"sleep_minutes", v.sleep_minutes}};
  }
  json operator()(const MedicationEvent& v) const {
    return {{"patient_id", v.patient_id},
            {"timestamp", format_timestamp(v.timestamp)},
            {"medication", v.medication},
            {"category", to_string(v.category)}};
  }
};

std::vector<std::string> string_list(Reader& r, const char* key) {
  std::vector<std::string> out;
  auto& v = r.require(key);
  if (!v.is_array()) schema_error(fmt::format("profile: '{}' must be an array", key));
  for (auto& item : v) {
    if (!item.is_string()) schema_error(fmt::format("profile: '{}' entries must be strings", key));
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

json payload_to_json(const Payload& payload) { return std::visit(PayloadEncoder{}, payload); }

json observation_to_json(const Observation& obs) {
  return {{"key", obs.key().str()},
          {"stream", to_string(obs.stream)},
          {"received_at", format_timestamp(obs.received_at)},
          {"payload", payload_to_json(obs.payload)}};
}

std::string encode_line(const Observation& obs) { return observation_to_json(obs).dump(); }

Payload payload_from_json(Stream stream, const json& j) {
  switch (stream) {
    case Stream::questionnaire: return questionnaire_from_json(j);
    case Stream::lung: return lung_from_json(j);
    case Stream::outdoor_env: return env_from_json(j);
    case Stream::indoor_env: return indoor_from_json(j);
    case Stream::activity_sleep: return activity_from_json(j);
    case Stream::medication_event: return medication_from_json(j);
  }
  schema_error("unreachable stream");
}

json profile_to_json(const PatientProfile& p) {
  json j{{"patient_id", p.patient_id},
         {"severity", to_string(p.severity)},
         {"rescue_meds", p.rescue_meds},
         {"controller_meds", p.controller_meds},
         {"region", p.region},
         {"deployment_start", format_date(p.deployment_start)},
         {"deployment_end", format_date(p.deployment_end)},
         {"enrollment_months", p.enrollment_months}};
  if (p.oral_steroid) j["oral_steroid"] = *p.oral_steroid;
  return j;
}

PatientProfile profile_from_json(const json& j) {
  Reader r{j, "profile"};
  PatientProfile p;
  p.patient_id = r.string("patient_id");
  p.severity = r.enumeration<Severity>("severity", parse_severity);
  p.rescue_meds = string_list(r, "rescue_meds");
  p.controller_meds = string_list(r, "controller_meds");
  if (r.find("oral_steroid")) p.oral_steroid = r.string("oral_steroid");
  p.region = r.string("region");
  p.deployment_start = r.date("deployment_start");
  p.deployment_end = r.date("deployment_end");
  p.enrollment_months = static_cast<int>(r.integer("enrollment_months"));
  r.finish();

  check_profile(p);
  return p;
}

}  // namespace airway
