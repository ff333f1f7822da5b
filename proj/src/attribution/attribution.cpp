#include "airway/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

void AnalysisParams::validate() const {
  auto bad = [](std::string msg) { throw Error(ErrorCode::config_error, std::move(msg)); };
  if (prolonged_window < 1) bad("prolonged window must be at least 1 day");
  if (prolonged_min < 1 || prolonged_min > prolonged_window) {
    bad(fmt::format("prolonged threshold {} must lie in [1, {}]", prolonged_min,
                    prolonged_window));
  }
  if (smoothing_days < 1) bad("smoothing must be at least 1 day");
  if (min_episode_days < 1) bad("episode threshold must be at least 1");
  if (!(learning_fraction > 0.0 && learning_fraction < 1.0)) {
    bad("learning fraction must lie strictly between 0 and 1");
  }
  if (!(eligibility_threshold >= 0.0 && eligibility_threshold <= 1.0)) {
    bad("eligibility threshold must lie in [0, 1]");
  }
}

std::string_view to_string(PeriodLabel p) {
  return p == PeriodLabel::learning ? "learning" : "prediction";
}

std::string_view to_string(PollenState s) {
  return s == PollenState::present ? "present" : "absent";
}

// ---- timeline ----

PatientTimeline::PatientTimeline(PatientProfile profile, Date first, std::vector<DayRecord> days,
                                 Baselines baselines)
    : profile_(std::move(profile)),
      first_(first),
      days_(std::move(days)),
      baselines_(std::move(baselines)) {
  auto deployment = profile_.deployment();
  flags_.resize(days_.size());
  for (std::size_t i = 0; i < days_.size(); ++i) {
    auto& d = days_[i];
    if (d.answered && deployment.contains(d.date)) flags_[i] = detect_episode(d, baselines_);
  }
}

DateRange PatientTimeline::span() const {
  return {first_, add_days(first_, static_cast<int>(days_.size()) - 1)};
}

const DayRecord* PatientTimeline::day(Date date) const {
  int i = days_between(first_, date);
  if (i < 0 || i >= static_cast<int>(days_.size())) return nullptr;
  return &days_[static_cast<std::size_t>(i)];
}

const std::optional<EpisodeFlag>& PatientTimeline::flag(Date date) const {
  static const std::optional<EpisodeFlag> none;
  int i = days_between(first_, date);
  if (i < 0 || i >= static_cast<int>(flags_.size())) return none;
  return flags_[static_cast<std::size_t>(i)];
}

bool PatientTimeline::unhealthy(Date date, Trigger t, const HealthyRanges& ranges) const {
  auto* d = day(date);
  if (!d) return false;
  auto value = d->env.max_of(parameter_of(t));
  return value && ranges.unhealthy(t, *value);
}

DateRange PatientTimeline::analyzed_span() const {
  auto deployment = profile_.deployment();
  std::optional<Date> last;
  for (auto& d : days_) {
    if (d.answered && deployment.contains(d.date)) last = d.date;
  }
  if (!last) return {deployment.first, add_days(deployment.first, -1)};
  return {deployment.first, *last};
}

PatientTimeline load_timeline(const StoreSnapshot& snap, const std::string& patient_id,
                              const AnalysisParams& params,
                              std::optional<DateRange> baseline_window) {
  auto profile = snap.profile(patient_id);
  auto deployment = profile.deployment();
  Date first = add_days(deployment.first, -std::max(params.prolonged_window, 1));
  auto days = snap.day_records(patient_id, {first, deployment.last});
  // Questionnaires outside the deployment are not analyzed.
  for (auto& d : days) {
    if (!deployment.contains(d.date)) d.answered = false;
  }
  auto baselines = compute_baselines(snap, patient_id, baseline_window.value_or(deployment));
  return PatientTimeline(std::move(profile), first, std::move(days), std::move(baselines));
}

bool unhealthy(EnvParameter parameter, double value, const HealthyRanges& ranges) {
  return ranges.unhealthy(parameter, value);
}

// ---- periods ----

PeriodSplit split_periods(const std::string& patient_id, DateRange span,
                          std::optional<Date> prediction_start, double learning_fraction) {
  if (span.empty()) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("{} has no answered days to analyze", patient_id));
  }
  Date boundary;
  if (prediction_start) {
    boundary = *prediction_start;
  } else {
    // The epsilon keeps an exact product like 63 * 2/3 from rounding up.
    int learning_days =
        static_cast<int>(std::ceil(span.days() * learning_fraction - 1e-9));
    boundary = add_days(span.first, learning_days);
  }
  PeriodSplit split{{patient_id, PeriodLabel::learning, {span.first, add_days(boundary, -1)}},
                    {patient_id, PeriodLabel::prediction, {boundary, span.last}}};
  if (split.learning.range.empty()) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("learning period before {} is empty", format_date(boundary)));
  }
  if (split.prediction.range.empty()) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("prediction period from {} is empty", format_date(boundary)));
  }
  return split;
}

std::vector<Trigger> rank_triggers(const std::array<int, kTriggerCount>& counts) {
  std::vector<Trigger> out;
  for (auto t : kAllTriggers) {
    if (counts[static_cast<std::size_t>(t)] > 0) out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(), [&](Trigger a, Trigger b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });
  return out;
}

namespace {

void widen(std::optional<ValueRange>& range, std::optional<double> lo, std::optional<double> hi) {
  if (!lo || !hi) return;
  if (!range) {
    range = ValueRange{*lo, *hi};
    return;
  }
  range->min = std::min(range->min, *lo);
  range->max = std::max(range->max, *hi);
}

}  // namespace

TriggerReport period_report(const PatientTimeline& tl, const AnalysisPeriod& period,
                            const AnalysisParams& params) {
  if (period.range.empty()) {
    throw Error(ErrorCode::empty_period,
                fmt::format("{} period for {} is empty", to_string(period.label),
                            period.patient_id));
  }
  TriggerReport r;
  r.period = period;
  for (Date d = period.range.first; d <= period.range.last; d = add_days(d, 1)) {
    if (auto* rec = tl.day(d)) {
      widen(r.temp_range, rec->env.temp_min, rec->env.temp_max);
      widen(r.humidity_range, rec->env.humidity_min, rec->env.humidity_max);
    }
    auto& flag = tl.flag(d);
    if (!flag) continue;
    ++r.answered_days;
    for (auto t : kAllTriggers) {
      if (tl.unhealthy(d, t, params.ranges)) ++r.unhealthy_days[static_cast<std::size_t>(t)];
    }
    if (!flag->is_episode()) continue;
    ++r.episode_days;
    bool explained = false;
    for (auto t : kAllTriggers) {
      if (tl.unhealthy(d, t, params.ranges) || tl.unhealthy(add_days(d, -1), t, params.ranges)) {
        ++r.contributor_days[static_cast<std::size_t>(t)];
        explained = true;
      }
    }
    if (explained) ++r.explained_days;
  }
  r.major_triggers = rank_triggers(r.contributor_days);
  return r;
}

TriggerReport period_report(const StoreSnapshot& snap, const AnalysisPeriod& period,
                            const AnalysisParams& params) {
  auto tl = load_timeline(snap, period.patient_id, params);
  return period_report(tl, period, params);
}

// ---- prolonged exposure ----

bool prolonged_exposure(std::span<const bool> preceding_unhealthy, int min_count) {
  auto n = std::count(preceding_unhealthy.begin(), preceding_unhealthy.end(), true);
  return n >= min_count;
}

bool prolonged_exposure(const PatientTimeline& tl, Date date, Trigger t,
                        const AnalysisParams& params) {
  int n = 0;
  for (int i = 1; i <= params.prolonged_window; ++i) {
    if (tl.unhealthy(add_days(date, -i), t, params.ranges)) ++n;
  }
  return n >= params.prolonged_min;
}

bool prolonged_exposure(const StoreSnapshot& snap, const std::string& patient_id, Date date,
                        Trigger t, const AnalysisParams& params) {
  auto tl = load_timeline(snap, patient_id, params);
  return prolonged_exposure(tl, date, t, params);
}

// ---- learning / prediction ----

PredictionEvaluation learn_and_predict(const PatientTimeline& tl, const AnalysisPeriod& learning,
                                       const AnalysisPeriod& prediction,
                                       const AnalysisParams& params) {
  PredictionEvaluation e;
  e.learning = period_report(tl, learning, params);
  if (e.learning.episode_days < params.min_episode_days) {
    throw Error(ErrorCode::insufficient_episodes,
                fmt::format("{} had {} episode days in the learning period, {} needed",
                            learning.patient_id, e.learning.episode_days,
                            params.min_episode_days));
  }
  if (e.learning.major_triggers.empty()) {
    throw Error(ErrorCode::insufficient_episodes,
                fmt::format("no trigger explains the learning episodes of {}",
                            learning.patient_id));
  }
  e.learned = e.learning.major_triggers;
  e.prediction = period_report(tl, prediction, params);

  for (Date d = prediction.range.first; d <= prediction.range.last; d = add_days(d, 1)) {
    auto& flag = tl.flag(d);
    if (!flag) continue;
    if (flag->is_episode()) {
      ++e.episode_days;
      bool hit = std::any_of(e.learned.begin(), e.learned.end(), [&](Trigger t) {
        return tl.unhealthy(d, t, params.ranges) || tl.unhealthy(add_days(d, -1), t, params.ranges);
      });
      if (hit) {
        ++e.hit_days;
        continue;
      }
      UnexplainedDay u{d, {}};
      for (auto t : e.learned) {
        if (prolonged_exposure(tl, d, t, params)) u.prolonged.push_back(t);
      }
      e.unexplained.push_back(std::move(u));
    } else {
      bool alarm = std::any_of(e.learned.begin(), e.learned.end(),
                               [&](Trigger t) { return tl.unhealthy(d, t, params.ranges); });
      if (alarm) ++e.false_alarm_days;
    }
  }
  return e;
}

PredictionEvaluation learn_and_predict(const StoreSnapshot& snap, const AnalysisPeriod& learning,
                                       const AnalysisPeriod& prediction,
                                       const AnalysisParams& params) {
  std::optional<DateRange> window;
  if (params.baseline_learning_only) window = learning.range;
  auto tl = load_timeline(snap, learning.patient_id, params, window);
  return learn_and_predict(tl, learning, prediction, params);
}

// ---- pollen segments ----

std::vector<PollenSegment> segment_by_pollen(std::span<const bool> present, Date first,
                                             int smoothing) {
  struct Run {
    bool present;
    int start;
    int length;
  };
  std::vector<Run> runs;
  for (int i = 0; i < static_cast<int>(present.size()); ++i) {
    bool p = present[static_cast<std::size_t>(i)];
    if (!runs.empty() && runs.back().present == p) {
      ++runs.back().length;
    } else {
      runs.push_back({p, i, 1});
    }
  }

  std::vector<Run> merged;
  for (auto& r : runs) {
    if (!merged.empty() && (r.length < smoothing || merged.back().present == r.present)) {
      merged.back().length += r.length;
    } else {
      merged.push_back(r);
    }
  }
  if (merged.size() > 1 && merged.front().length < smoothing) {
    merged[1].start = merged[0].start;
    merged[1].length += merged[0].length;
    merged.erase(merged.begin());
  }

  std::vector<PollenSegment> out;
  for (auto& r : merged) {
    out.push_back({r.present ? PollenState::present : PollenState::absent,
                   {add_days(first, r.start), add_days(first, r.start + r.length - 1)}});
  }
  return out;
}

std::vector<PollenSegment> segment_by_pollen(const PatientTimeline& tl,
                                             const AnalysisParams& params) {
  auto deployment = tl.profile().deployment();
  auto n = static_cast<std::size_t>(deployment.days());
  auto present = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto* rec = tl.day(add_days(deployment.first, static_cast<int>(i)));
    auto pollen = rec ? rec->env.pollen_max : std::nullopt;
    present[i] = pollen && *pollen > 0;
  }
  return segment_by_pollen(std::span<const bool>(present.get(), n), deployment.first,
                           params.smoothing_days);
}

std::vector<PollenSegment> segment_by_pollen(const StoreSnapshot& snap,
                                             const std::string& patient_id,
                                             const AnalysisParams& params) {
  auto tl = load_timeline(snap, patient_id, params);
  return segment_by_pollen(tl, params);
}

// ---- seasons and cohorts ----

SeasonAssignment assign_season(DateRange deployment, const SeasonConfig& seasons) {
  SeasonAssignment a;
  std::array<std::optional<Date>, 4> first_seen;
  for (Date d = deployment.first; d <= deployment.last; d = add_days(d, 1)) {
    auto s = static_cast<std::size_t>(seasons.season_of(d));
    ++a.days[s];
    if (!first_seen[s]) first_seen[s] = d;
  }
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < 4; ++s) {
    if (a.days[s] == 0) continue;
    if (!best || a.days[s] > a.days[*best] ||
        (a.days[s] == a.days[*best] && *first_seen[s] < *first_seen[*best])) {
      best = s;
    }
  }
  if (!best) {
    a.season = seasons.season_of(deployment.first);
    return a;
  }
  a.season = static_cast<Season>(*best);
  int total = std::max(deployment.days(), 1);
  for (std::size_t s = 0; s < 4; ++s) {
    // Integer form of days / total >= 0.25.
    if (s != *best && a.days[s] > 0 && 4 * a.days[s] >= total) a.spanning = true;
  }
  return a;
}

CohortMember cohort_member(const StoreSnapshot& snap, const std::string& patient_id,
                           const AnalysisParams& params) {
  CohortMember m;
  m.patient_id = patient_id;
  m.eligibility = eligibility(snap, patient_id, params.eligibility_threshold);
  auto& profile = snap.profile(patient_id);
  m.season = assign_season(profile.deployment(), params.seasons);
  if (!m.eligibility.included) return m;

  auto tl = load_timeline(snap, patient_id, params);
  auto span = tl.analyzed_span();
  if (span.empty()) return m;
  AnalysisPeriod learning{patient_id, PeriodLabel::learning, span};
  if (span.days() > 1) learning = split_periods(patient_id, span, std::nullopt,
                                                params.learning_fraction).learning;
  auto report = period_report(tl, learning, params);
  m.learning_episode_days = report.episode_days;
  m.major_triggers = report.major_triggers;
  return m;
}

CohortSummary cohort_summary(Season season, std::span<const CohortMember> members) {
  CohortSummary s;
  s.season = season;
  for (auto& m : members) {
    if (!m.eligibility.included || m.season.season != season) continue;
    ++s.patients_analyzed;
    if (m.learning_episode_days == 0) ++s.no_episode_patients;
    if (auto top = m.top_trigger()) ++s.top_trigger_patients[static_cast<std::size_t>(*top)];
  }
  if (s.patients_analyzed == 0) {
    throw Error(ErrorCode::empty_cohort,
                fmt::format("no eligible patients in {}", to_string(season)));
  }
  double n = s.patients_analyzed;
  for (std::size_t i = 0; i < kTriggerCount; ++i) {
    s.major_trigger_distribution[i] = s.top_trigger_patients[i] / n;
  }
  s.no_episode_fraction = s.no_episode_patients / n;
  return s;
}

CohortSummary cohort_summary(const StoreSnapshot& snap, Season season,
                             const AnalysisParams& params) {
  std::vector<CohortMember> members;
  for (auto& p : snap.patients()) members.push_back(cohort_member(snap, p.patient_id, params));
  return cohort_summary(season, members);
}

// ---- JSON ----

namespace {

json counts_json(const std::array<int, kTriggerCount>& counts) {
  json j = json::object();
  for (auto t : kAllTriggers) j[std::string(to_string(t))] = counts[static_cast<std::size_t>(t)];
  return j;
}

json triggers_json(const std::vector<Trigger>& ts) {
  json j = json::array();
  for (auto t : ts) j.push_back(std::string(to_string(t)));
  return j;
}

json range_json(const std::optional<ValueRange>& r) {
  if (!r) return nullptr;
  return json{{"min", r->min}, {"max", r->max}};
}

}  // namespace

json to_json(const TriggerReport& r) {
  return json{
      {"patient_id", r.period.patient_id},
      {"period", std::string(to_string(r.period.label))},
      {"from", format_date(r.period.range.first)},
      {"to", format_date(r.period.range.last)},
      {"days", r.period.range.days()},
      {"answered_days", r.answered_days},
      {"unhealthy_days", counts_json(r.unhealthy_days)},
      {"episode_days", r.episode_days},
      {"contributor_days", counts_json(r.contributor_days)},
      {"explained_days", r.explained_days},
      {"major_triggers", triggers_json(r.major_triggers)},
      {"temperature_range", range_json(r.temp_range)},
      {"humidity_range", range_json(r.humidity_range)},
  };
}

json to_json(const PredictionEvaluation& e) {
  json unexplained = json::array();
  for (auto& u : e.unexplained) {
    unexplained.push_back(
        json{{"date", format_date(u.date)}, {"prolonged_exposure", triggers_json(u.prolonged)}});
  }
  return json{
      {"learning", to_json(e.learning)},
      {"prediction", to_json(e.prediction)},
      {"learned_triggers", triggers_json(e.learned)},
      {"episode_days", e.episode_days},
      {"hit_days", e.hit_days},
      {"unexplained_days", e.unexplained.size()},
      {"unexplained", std::move(unexplained)},
      {"false_alarm_days", e.false_alarm_days},
  };
}

json to_json(const CohortSummary& s) {
  json dist = json::object();
  for (auto t : kAllTriggers) dist[std::string(to_string(t))] = s.fraction(t);
  return json{
      {"season", std::string(to_string(s.season))},
      {"patients_analyzed", s.patients_analyzed},
      {"major_trigger_distribution", std::move(dist)},
      {"top_trigger_patients", counts_json(s.top_trigger_patients)},
      {"no_episode_patients", s.no_episode_patients},
      {"no_episode_fraction", s.no_episode_fraction},
  };
}

json to_json(const std::vector<PollenSegment>& segments) {
  json j = json::array();
  for (auto& s : segments) {
    j.push_back(json{{"state", std::string(to_string(s.state))},
                     {"from", format_date(s.range.first)},
                     {"to", format_date(s.range.last)},
                     {"days", s.range.days()}});
  }
  return j;
}

}  // namespace airway
