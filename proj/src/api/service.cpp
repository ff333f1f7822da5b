#include "airway/api.hpp"

#include <fmt/format.h>

#include "airway/attribution.hpp"
#include "airway/episode.hpp"
#include "airway/error.hpp"

namespace airway {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema_violation:
    case ErrorCode::identity_leak:
    case ErrorCode::unknown_stream:
    case ErrorCode::no_healthy_range: return 400;
    case ErrorCode::unauthorized: return 401;
    case ErrorCode::unknown_patient: return 404;
    case ErrorCode::batch_too_large: return 413;
    case ErrorCode::unanswered_day:
    case ErrorCode::empty_period:
    case ErrorCode::insufficient_episodes:
    case ErrorCode::empty_cohort:
    case ErrorCode::insufficient_data: return 422;
    case ErrorCode::storage_unavailable:
    case ErrorCode::adapter_unavailable: return 503;
    case ErrorCode::store_corruption:
    case ErrorCode::adapter_parse_error:
    case ErrorCode::config_error: return 500;
  }
  return 500;
}

ApiResponse error_response(const Error& e) {
  return {http_status(e.code()),
          json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump()};
}

namespace {

ApiResponse ok(const json& j) { return {200, j.dump()}; }

std::optional<Date> date_param(const QueryParams& q, const char* name) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  try {
    return parse_date(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::schema_violation, fmt::format("{} must be YYYY-MM-DD", name));
  }
}

DateRange window(const QueryParams& q, DateRange fallback) {
  DateRange r{date_param(q, "from").value_or(fallback.first),
              date_param(q, "to").value_or(fallback.last)};
  if (r.days() > 3660) throw Error(ErrorCode::schema_violation, "window longer than ten years");
  return r;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json reasons_json(const CriterionSet& reasons) {
  json j = json::array();
  for (auto c : reasons.items()) j.push_back(to_string(c));
  return j;
}

json baseline_json(const LungBaseline& b) {
  return json{{"mean", b.mean}, {"sd", b.sd}, {"n", b.n},
              {"threshold", b.usable() ? json(b.threshold()) : json(nullptr)}};
}

}  // namespace

ApiService::ApiService(ObservationStore& store, TokenRegistry tokens, ApiConfig config)
    : store_(store),
      tokens_(std::move(tokens)),
      config_(std::move(config)),
      gateway_(store_, tokens_) {}

template <class F>
ApiResponse ApiService::guarded(F&& f) const {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse ApiService::post_observations(std::string_view authorization, std::string_view body,
                                          Timestamp now) {
  return guarded([&] {
    constexpr std::string_view prefix = "Bearer ";
    if (authorization.substr(0, prefix.size()) != prefix) {
      throw Error(ErrorCode::unauthorized, "missing bearer token");
    }
    auto receipt = gateway_.ingest(authorization.substr(prefix.size()), body, now);
    return ApiResponse{receipt.rejected.empty() ? 200 : 207, to_json(receipt).dump()};
  });
}

ApiResponse ApiService::patients() const {
  return guarded([&] {
    auto snap = store_.snapshot();
    json list = json::array();
    for (auto& p : snap.patients()) {
      auto j = profile_to_json(p);
      j["answer_rate"] = snap.answer_rate(p.patient_id);
      list.push_back(std::move(j));
    }
    return ok(list);
  });
}

ApiResponse ApiService::timeline(const std::string& patient_id, const QueryParams& q) const {
  return guarded([&] {
    auto snap = store_.snapshot();
    auto& profile = snap.profile(patient_id);
    auto range = window(q, profile.deployment());
    auto& params = config_.params;
    auto baselines = compute_baselines(snap, patient_id, profile.deployment());
    json days = json::array();
    for (auto& d : snap.day_records(patient_id, range)) {
      json symptoms = json::array();
      for (auto s : kAllSymptoms) {
        if (d.symptoms_union.contains(s)) symptoms.push_back(std::string(to_string(s)));
      }
      json lung = json::array();
      for (auto& r : d.lung_readings) lung.push_back({{"pef", r.pef}, {"fev1", r.fev1}});
      json meds = json::array();
      for (auto& m : d.medication_events) {
        meds.push_back({{"medication", m.medication},
                        {"category", std::string(to_string(m.category))},
                        {"timestamp", format_timestamp(m.timestamp)}});
      }
      json env = {{"pollen", opt(d.env.pollen_max)},
                  {"pm25", opt(d.env.pm25_max)},
                  {"ozone", opt(d.env.ozone_max)},
                  {"temp_min", opt(d.env.temp_min)},
                  {"temp_max", opt(d.env.temp_max)},
                  {"humidity_min", opt(d.env.humidity_min)},
                  {"humidity_max", opt(d.env.humidity_max)}};
      json unhealthy = json::object();
      for (auto t : kAllTriggers) {
        auto v = d.env.max_of(parameter_of(t));
        unhealthy[std::string(to_string(t))] = v && params.ranges.unhealthy(t, *v);
      }
      bool in_deployment = profile.deployment().contains(d.date);
      json day = {{"date", format_date(d.date)},
                  {"in_deployment", in_deployment},
                  {"answered", d.answered},
                  {"symptoms", std::move(symptoms)},
                  {"rescue_taken", d.rescue_taken},
                  {"controller_asked", d.controller_asked},
                  {"controller_taken", d.controller_taken},
                  {"night_awakening", d.night_awakening ? json(*d.night_awakening) : json(nullptr)},
                  {"activity_limited", d.activity_limited},
                  {"lung", std::move(lung)},
                  {"medications", std::move(meds)},
                  {"env", std::move(env)},
                  {"unhealthy", std::move(unhealthy)}};
      if (d.answered && in_deployment) {
        auto flag = detect_episode(d, baselines);
        day["episode"] = flag.is_episode();
        day["reasons"] = reasons_json(flag.reasons);
      } else {
        day["episode"] = nullptr;
        day["reasons"] = json::array();
      }
      days.push_back(std::move(day));
    }
    return ok(json{{"patient_id", patient_id},
                   {"from", format_date(range.first)},
                   {"to", format_date(range.last)},
                   {"region", profile.region},
                   {"days", std::move(days)}});
  });
}

ApiResponse ApiService::episodes(const std::string& patient_id, const QueryParams& q) const {
  return guarded([&] {
    auto snap = store_.snapshot();
    auto& profile = snap.profile(patient_id);
    auto range = window(q, profile.deployment());
    auto tl = load_timeline(snap, patient_id, config_.params);
    json list = json::array();
    for (Date d = range.first; d <= range.last; d = add_days(d, 1)) {
      auto& flag = tl.flag(d);
      if (!flag) continue;
      list.push_back({{"date", format_date(d)},
                      {"episode", flag->is_episode()},
                      {"reasons", reasons_json(flag->reasons)}});
    }
    return ok(json{{"patient_id", patient_id},
                   {"baselines", {{"pef", baseline_json(tl.baselines().pef)},
                                  {"fev1", baseline_json(tl.baselines().fev1)}}},
                   {"days", std::move(list)}});
  });
}

json triggers_json(const StoreSnapshot& snap, const std::string& patient_id,
                   std::optional<Date> learning_end, const AnalysisParams& params) {
  auto tl = load_timeline(snap, patient_id, params);
  auto split = split_periods(patient_id, tl.analyzed_span(), learning_end,
                             params.learning_fraction);
  if (params.baseline_learning_only) {
    tl = load_timeline(snap, patient_id, params, split.learning.range);
  }
  json out = {{"patient_id", patient_id},
              {"learning", to_json(period_report(tl, split.learning, params))},
              {"prediction", to_json(period_report(tl, split.prediction, params))}};
  try {
    out["evaluation"] = to_json(learn_and_predict(tl, split.learning, split.prediction, params));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_episodes) throw;
    out["evaluation"] = nullptr;
    out["evaluation_error"] = {{"error", std::string(to_string(e.code()))},
                               {"message", e.what()}};
  }
  return out;
}

ApiResponse ApiService::triggers(const std::string& patient_id, const QueryParams& q) const {
  return guarded([&] {
    auto snap = store_.snapshot();
    return ok(triggers_json(snap, patient_id, date_param(q, "learning_end"), config_.params));
  });
}

ApiResponse ApiService::summary(const std::string& patient_id, const QueryParams& q) const {
  return guarded([&] {
    auto snap = store_.snapshot();
    auto& profile = snap.profile(patient_id);
    auto range = window(q, profile.deployment());
    auto s = patient_summary(snap, patient_id, range);
    json symptoms = json::array();
    for (auto sym : symptom_display_order()) {
      symptoms.push_back({{"symptom", std::string(to_string(sym))}, {"days", s.symptom(sym)}});
    }
    auto elig = eligibility(snap, patient_id, config_.params.eligibility_threshold);
    auto season = assign_season(profile.deployment(), config_.params.seasons);
    return ok(json{
        {"patient_id", patient_id},
        {"from", format_date(range.first)},
        {"to", format_date(range.last)},
        {"answered_days", s.answered_days},
        {"episode_days", s.episode_days},
        {"symptoms", std::move(symptoms)},
        {"any_symptom_days", s.any_symptom_days},
        {"night_awakening_days", s.night_awakening_days},
        {"activity_limited_days", s.activity_limited_days},
        {"rescue_days", s.rescue_days},
        {"abnormal_pef_days", s.abnormal_pef_days},
        {"abnormal_fev1_days", s.abnormal_fev1_days},
        {"abnormal_lung_days", s.abnormal_lung_days},
        {"compliance", {{"controller_compliance", s.compliance.controller_compliance},
                        {"answered_days", s.compliance.answered_days},
                        {"compliant_days", s.compliance.compliant_days}}},
        {"eligibility", {{"included", elig.included}, {"answer_rate", elig.answer_rate}}},
        {"season", {{"season", std::string(to_string(season.season))},
                    {"spanning", season.spanning}}},
        {"pollen_segments", to_json(segment_by_pollen(snap, patient_id, config_.params))},
    });
  });
}

ApiResponse ApiService::cohort_triggers(const QueryParams& q) const {
  return guarded([&] {
    auto it = q.find("season");
    if (it == q.end()) throw Error(ErrorCode::schema_violation, "season is required");
    auto season = parse_season(it->second);
    if (!season) throw Error(ErrorCode::schema_violation, fmt::format("unknown season {}", it->second));
    auto snap = store_.snapshot();
    std::vector<CohortMember> members;
    for (auto& p : snap.patients()) {
      members.push_back(cohort_member(snap, p.patient_id, config_.params));
    }
    auto j = to_json(cohort_summary(*season, members));
    json list = json::array();
    for (auto& m : members) {
      if (m.season.season != *season) continue;
      auto top = m.top_trigger();
      list.push_back({{"patient_id", m.patient_id},
                      {"eligible", m.eligibility.included},
                      {"answer_rate", m.eligibility.answer_rate},
                      {"spanning", m.season.spanning},
                      {"learning_episode_days", m.learning_episode_days},
                      {"top_trigger", top ? json(std::string(to_string(*top))) : json(nullptr)}});
    }
    j["members"] = std::move(list);
    return ok(j);
  });
}

ApiResponse ApiService::alerts(const QueryParams& q) const {
  return guarded([&] {
    std::optional<std::string> patient;
    if (auto it = q.find("patient_id"); it != q.end() && !it->second.empty()) patient = it->second;
    auto from = date_param(q, "from");
    auto to = date_param(q, "to");
    std::optional<DateRange> range;
    if (from || to) {
      range = DateRange{from.value_or(Date{}), to.value_or(add_days(Date{}, 1'000'000))};
    }
    auto snap = store_.snapshot();
    json list = json::array();
    for (auto& a : snap.alerts(patient, range)) list.push_back(alert_to_json(a));
    return ok(list);
  });
}

ApiResponse ApiService::config() const {
  return ok(json{{"healthy_ranges", to_json(config_.params.ranges)},
                 {"analysis", to_json(config_.params)},
                 {"seasons", to_json(config_.params.seasons)},
                 {"utc_offset_minutes", config_.utc_offset_minutes}});
}

}  // namespace airway
