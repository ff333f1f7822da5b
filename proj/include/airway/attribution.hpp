#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airway/codec.hpp"
#include "airway/episode.hpp"
#include "airway/ranges.hpp"
#include "airway/season.hpp"
#include "airway/store.hpp"

namespace airway {

struct AnalysisParams {
  HealthyRanges ranges;
  int prolonged_window = 7;  // K days strictly before the date
  int prolonged_min = 5;     // M of them unhealthy
  int smoothing_days = 3;    // pollen runs shorter than this are merged
  int min_episode_days = 8;  // learning episodes needed to learn a model
  double learning_fraction = 2.0 / 3.0;
  double eligibility_threshold = kDefaultEligibilityThreshold;
  SeasonConfig seasons;
  /// Compute lung baselines from the learning period instead of the
  /// whole deployment.
  bool baseline_learning_only = false;

  /// Throws Error{config_error}.
  void validate() const;
};

enum class PeriodLabel { learning, prediction };
std::string_view to_string(PeriodLabel p);

struct AnalysisPeriod {
  std::string patient_id;
  PeriodLabel label = PeriodLabel::learning;
  DateRange range;
};

struct ValueRange {
  double min = 0;
  double max = 0;
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

struct TriggerReport {
  AnalysisPeriod period;
  int answered_days = 0;
  std::array<int, kTriggerCount> unhealthy_days{};  // answered days with the trigger unhealthy
  int episode_days = 0;
  std::array<int, kTriggerCount> contributor_days{};
  int explained_days = 0;
  std::vector<Trigger> major_triggers;  // ranked, strongest first
  std::optional<ValueRange> temp_range;
  std::optional<ValueRange> humidity_range;

  int unhealthy(Trigger t) const { return unhealthy_days[static_cast<std::size_t>(t)]; }
  int contributors(Trigger t) const { return contributor_days[static_cast<std::size_t>(t)]; }
};

/// Everything the analytics need about one patient, loaded from a single
/// snapshot: one DayRecord per day from `lookback` days before deployment
/// start through deployment end, plus episode flags for answered days.
class PatientTimeline {
 public:
  PatientTimeline(PatientProfile profile, Date first, std::vector<DayRecord> days,
                  Baselines baselines);

  const PatientProfile& profile() const { return profile_; }
  const std::string& patient_id() const { return profile_.patient_id; }
  const Baselines& baselines() const { return baselines_; }
  DateRange span() const;

  /// nullptr outside the loaded span.
  const DayRecord* day(Date date) const;
  /// Set only for answered days inside the deployment.
  const std::optional<EpisodeFlag>& flag(Date date) const;

  /// Trigger unhealthy on `date`. Missing data and dates outside the span
  /// count as healthy.
  bool unhealthy(Date date, Trigger t, const HealthyRanges& ranges) const;

  /// Deployment start through the last answered day. Empty when nothing
  /// was answered.
  DateRange analyzed_span() const;

 private:
  PatientProfile profile_;
  Date first_;
  std::vector<DayRecord> days_;
  std::vector<std::optional<EpisodeFlag>> flags_;
  Baselines baselines_;
};

/// Loads a timeline. Baselines use `baseline_window` when given, else the
/// whole deployment. Throws Error{unknown_patient}.
PatientTimeline load_timeline(const StoreSnapshot& snap, const std::string& patient_id,
                              const AnalysisParams& params,
                              std::optional<DateRange> baseline_window = std::nullopt);

/// Same as HealthyRanges::unhealthy; kept as the analytics entry point.
bool unhealthy(EnvParameter parameter, double value, const HealthyRanges& ranges = {});

struct PeriodSplit {
  AnalysisPeriod learning;
  AnalysisPeriod prediction;
};

/// Splits `span` so the learning period ends the day before
/// `prediction_start`, or after ceil(fraction * days) days by default.
/// Throws Error{insufficient_data} if either side would be empty.
PeriodSplit split_periods(const std::string& patient_id, DateRange span,
                          std::optional<Date> prediction_start, double learning_fraction);

/// Ranks triggers with a positive count, highest first, ties in enum order.
std::vector<Trigger> rank_triggers(const std::array<int, kTriggerCount>& counts);

/// Throws Error{empty_period}.
TriggerReport period_report(const PatientTimeline& tl, const AnalysisPeriod& period,
                            const AnalysisParams& params);
TriggerReport period_report(const StoreSnapshot& snap, const AnalysisPeriod& period,
                            const AnalysisParams& params = {});

/// True iff at least `min_count` of the window entries are set.
bool prolonged_exposure(std::span<const bool> preceding_unhealthy, int min_count);
bool prolonged_exposure(const PatientTimeline& tl, Date date, Trigger t,
                        const AnalysisParams& params);
bool prolonged_exposure(const StoreSnapshot& snap, const std::string& patient_id, Date date,
                        Trigger t, const AnalysisParams& params = {});

struct UnexplainedDay {
  Date date;
  std::vector<Trigger> prolonged;  // learned triggers with prolonged exposure before the date
};

struct PredictionEvaluation {
  TriggerReport learning;
  TriggerReport prediction;
  std::vector<Trigger> learned;
  int episode_days = 0;
  int hit_days = 0;
  std::vector<UnexplainedDay> unexplained;
  int false_alarm_days = 0;
};

/// Throws Error{insufficient_episodes} when the learning period has fewer
/// than `min_episode_days` episodes or no major trigger.
PredictionEvaluation learn_and_predict(const PatientTimeline& tl, const AnalysisPeriod& learning,
                                       const AnalysisPeriod& prediction,
                                       const AnalysisParams& params);
PredictionEvaluation learn_and_predict(const StoreSnapshot& snap, const AnalysisPeriod& learning,
                                       const AnalysisPeriod& prediction,
                                       const AnalysisParams& params = {});

enum class PollenState { absent, present };
std::string_view to_string(PollenState s);

struct PollenSegment {
  PollenState state = PollenState::absent;
  DateRange range;
  friend bool operator==(const PollenSegment&, const PollenSegment&) = default;
};

/// Runs of present/absent days starting at `first`; runs shorter than
/// `smoothing` days are merged into the preceding run (the following one
/// for a leading run).
std::vector<PollenSegment> segment_by_pollen(std::span<const bool> present, Date first,
                                             int smoothing);
std::vector<PollenSegment> segment_by_pollen(const PatientTimeline& tl, const AnalysisParams& params);
std::vector<PollenSegment> segment_by_pollen(const StoreSnapshot& snap,
                                             const std::string& patient_id,
                                             const AnalysisParams& params = {});

struct SeasonAssignment {
  Season season = Season::winter;
  bool spanning = false;
  std::array<int, 4> days{};  // per season
};

SeasonAssignment assign_season(DateRange deployment, const SeasonConfig& seasons);

/// Per-patient input to the cohort summary.
struct CohortMember {
  std::string patient_id;
  Eligibility eligibility;
  SeasonAssignment season;
  int learning_episode_days = 0;
  std::vector<Trigger> major_triggers;

  std::optional<Trigger> top_trigger() const {
    if (major_triggers.empty()) return std::nullopt;
    return major_triggers.front();
  }
};

/// Eligibility, season and default-split learning analysis for one patient.
CohortMember cohort_member(const StoreSnapshot& snap, const std::string& patient_id,
                           const AnalysisParams& params = {});

struct CohortSummary {
  Season season = Season::winter;
  int patients_analyzed = 0;
  std::array<int, kTriggerCount> top_trigger_patients{};
  std::array<double, kTriggerCount> major_trigger_distribution{};
  int no_episode_patients = 0;
  double no_episode_fraction = 0;

  double fraction(Trigger t) const {
    return major_trigger_distribution[static_cast<std::size_t>(t)];
  }
};

/// Eligible members assigned to `season`. Throws Error{empty_cohort}.
CohortSummary cohort_summary(Season season, std::span<const CohortMember> members);
CohortSummary cohort_summary(const StoreSnapshot& snap, Season season,
                             const AnalysisParams& params = {});

json to_json(const TriggerReport& r);
json to_json(const PredictionEvaluation& e);
json to_json(const CohortSummary& s);
json to_json(const std::vector<PollenSegment>& segments);

}  // namespace airway
