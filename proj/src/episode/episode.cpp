#include "airway/episode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

std::string_view to_string(LungMetric m) { return m == LungMetric::pef ? "pef" : "fev1"; }

std::string to_string(Criterion c) {
  auto index = static_cast<std::size_t>(c);
  if (index < kSymptomCount) {
    return fmt::format("symptom:{}", to_string(kAllSymptoms[index]));
  }
  switch (c) {
    case Criterion::night_awakening: return "night_awakening";
    case Criterion::activity_limitation: return "activity_limitation";
    case Criterion::rescue_medication: return "rescue_medication";
    case Criterion::abnormal_pef: return "abnormal_pef";
    case Criterion::abnormal_fev1: return "abnormal_fev1";
    default: return "?";
  }
}

Criterion criterion_of(Symptom s) { return static_cast<Criterion>(static_cast<unsigned>(s)); }

std::vector<Criterion> CriterionSet::items() const {
  std::vector<Criterion> out;
  for (unsigned i = 0; i < kCriterionCount; ++i) {
    auto c = static_cast<Criterion>(i);
    if (contains(c)) out.push_back(c);
  }
  return out;
}

LungBaseline lung_baseline(std::span<const LungFunctionReading> readings, LungMetric metric) {
  LungBaseline b;
  b.metric = metric;
  if (!readings.empty()) b.patient_id = readings.front().patient_id;

  std::vector<double> values;
  values.reserve(readings.size());
  for (auto& r : readings) values.push_back(metric == LungMetric::pef ? r.pef : r.fev1);
  // Summing in sorted order keeps the result independent of reading order.
  std::sort(values.begin(), values.end());
  b.n = values.size();
  if (values.empty()) return b;

  b.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(b.n);
  if (b.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - b.mean) * (v - b.mean);
    b.sd = std::sqrt(ss / static_cast<double>(b.n - 1));
  }
  return b;
}

Baselines compute_baselines(const StoreSnapshot& snap, const std::string& patient_id,
                            DateRange window) {
  auto readings = snap.lung_readings(patient_id, window);
  Baselines b{lung_baseline(readings, LungMetric::pef), lung_baseline(readings, LungMetric::fev1)};
  b.pef.patient_id = b.fev1.patient_id = patient_id;
  return b;
}

EpisodeFlag detect_episode(const DayRecord& day, const Baselines& baselines) {
  if (!day.answered) {
    throw Error(ErrorCode::unanswered_day,
                fmt::format("{} has no questionnaire answers on {}", day.patient_id,
                            format_date(day.date)));
  }
  EpisodeFlag flag{day.patient_id, day.date, {}};
  for (auto s : kAllSymptoms) {
    if (day.symptoms_union.contains(s)) flag.reasons.insert(criterion_of(s));
  }
  if (day.night_awakening.value_or(false)) flag.reasons.insert(Criterion::night_awakening);
  if (day.activity_limited) flag.reasons.insert(Criterion::activity_limitation);
  if (day.rescue_taken) flag.reasons.insert(Criterion::rescue_medication);
  for (auto& r : day.lung_readings) {
    if (baselines.pef.abnormal(r.pef)) flag.reasons.insert(Criterion::abnormal_pef);
    if (baselines.fev1.abnormal(r.fev1)) flag.reasons.insert(Criterion::abnormal_fev1);
  }
  return flag;
}

ComplianceReport compliance(const std::string& patient_id, DateRange range,
                            std::span<const DayRecord> days) {
  ComplianceReport report{patient_id, range, 0.0, 0, 0};
  for (auto& d : days) {
    if (!range.contains(d.date) || !d.answered || !d.controller_asked) continue;
    ++report.answered_days;
    if (d.controller_taken) ++report.compliant_days;
  }
  if (report.answered_days > 0) {
    report.controller_compliance =
        static_cast<double>(report.compliant_days) / static_cast<double>(report.answered_days);
  }
  return report;
}

ComplianceReport compliance(const StoreSnapshot& snap, const std::string& patient_id,
                            DateRange range) {
  auto days = snap.day_records(patient_id, range);
  return compliance(patient_id, range, days);
}

Eligibility eligibility(double answer_rate, double threshold) {
  return {!(answer_rate < threshold), answer_rate};
}

Eligibility eligibility(const StoreSnapshot& snap, const std::string& patient_id,
                        double threshold) {
  return eligibility(snap.answer_rate(patient_id), threshold);
}

std::span<const Symptom> symptom_display_order() {
  static constexpr std::array<Symptom, kSymptomCount> order = {
      Symptom::chest_tightness,     Symptom::cough,
      Symptom::wheeze,              Symptom::hard_fast_breathing,
      Symptom::cant_talk_full_sentences, Symptom::nose_opens_wide,
  };
  return order;
}

PatientSummary patient_summary(const std::string& patient_id, DateRange range,
                               std::span<const DayRecord> days, const Baselines& baselines) {
  PatientSummary s;
  s.patient_id = patient_id;
  s.range = range;
  for (auto& d : days) {
    if (!range.contains(d.date) || !d.answered) continue;
    ++s.answered_days;
    auto flag = detect_episode(d, baselines);
    if (flag.is_episode()) ++s.episode_days;
    bool any_symptom = false;
    for (auto sym : kAllSymptoms) {
      if (flag.reasons.contains(criterion_of(sym))) {
        ++s.symptom_days[static_cast<std::size_t>(sym)];
        any_symptom = true;
      }
    }
    if (any_symptom) ++s.any_symptom_days;
    if (flag.reasons.contains(Criterion::night_awakening)) ++s.night_awakening_days;
    if (flag.reasons.contains(Criterion::activity_limitation)) ++s.activity_limited_days;
    if (flag.reasons.contains(Criterion::rescue_medication)) ++s.rescue_days;
    bool pef = flag.reasons.contains(Criterion::abnormal_pef);
    bool fev1 = flag.reasons.contains(Criterion::abnormal_fev1);
    if (pef) ++s.abnormal_pef_days;
    if (fev1) ++s.abnormal_fev1_days;
    if (pef || fev1) ++s.abnormal_lung_days;
  }
  s.compliance = compliance(patient_id, range, days);
  return s;
}

PatientSummary patient_summary(const StoreSnapshot& snap, const std::string& patient_id,
                               DateRange range) {
  auto& profile = snap.profile(patient_id);
  auto baselines = compute_baselines(snap, patient_id, profile.deployment());
  auto days = snap.day_records(patient_id, range);
  return patient_summary(patient_id, range, days, baselines);
}

}  // namespace airway
