#include "airway/alerting.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

std::vector<Alert> evaluate_alerts(const PatientProfile& profile, Date date,
                                   std::span<const Trigger> learned,
                                   const DailyEnvAggregate& forecast, const DayRecord& yesterday,
                                   const HealthyRanges& ranges) {
  std::vector<Alert> out;
  for (auto t : learned) {
    auto value = forecast.max_of(parameter_of(t));
    if (value && ranges.unhealthy(t, *value)) {
      out.push_back({profile.patient_id, AlertKind::trigger_forecast, date,
                     std::string(to_string(t)), Audience::patient});
    }
  }

  if (yesterday.answered && yesterday.controller_asked && !yesterday.controller_taken) {
    std::string med = profile.controller_meds.empty() ? "controller" : profile.controller_meds.front();
    out.push_back({profile.patient_id, AlertKind::medication_reminder, date, med,
                   Audience::patient});
  }

  for (auto& ev : yesterday.medication_events) {
    if (ev.category != MedicationCategory::oral_steroid) continue;
    out.push_back({profile.patient_id, AlertKind::clinician_flag, date,
                   fmt::format("oral_steroid:{}", ev.medication), Audience::clinician});
  }

  std::sort(out.begin(), out.end(),
            [](const Alert& a, const Alert& b) { return a.key() < b.key(); });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Alert& a, const Alert& b) { return a.key() == b.key(); }),
            out.end());
  return out;
}

std::vector<Trigger> learned_triggers(const StoreSnapshot& snap, const std::string& patient_id,
                                      const AnalysisParams& params) {
  auto tl = load_timeline(snap, patient_id, params);
  auto span = tl.analyzed_span();
  if (span.days() < 2) return {};
  auto split = split_periods(patient_id, span, std::nullopt, params.learning_fraction);
  return period_report(tl, split.learning, params).major_triggers;
}

std::vector<Alert> run_alerts(ObservationStore& store, const std::string& patient_id, Date date,
                              const AnalysisParams& params) {
  std::vector<Alert> alerts;
  {
    auto snap = store.snapshot();
    auto& profile = snap.profile(patient_id);
    auto learned = learned_triggers(snap, patient_id, params);
    auto forecast = snap.daily_aggregate(profile.region, add_days(date, 1));
    auto yesterday = snap.day_record(patient_id, add_days(date, -1));
    alerts = evaluate_alerts(profile, date, learned, forecast, yesterday, params.ranges);
  }
  store.put_alerts(alerts);
  return alerts;
}

}  // namespace airway
