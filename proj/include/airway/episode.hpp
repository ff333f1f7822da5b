#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airway/model.hpp"
#include "airway/store.hpp"

namespace airway {

enum class LungMetric { pef, fev1 };
std::string_view to_string(LungMetric m);

/// Mean and sample (n-1) standard deviation of one lung metric.
struct LungBaseline {
  std::string patient_id;
  LungMetric metric = LungMetric::pef;
  double mean = 0;
  double sd = 0;
  std::size_t n = 0;

  /// Fewer than two readings never flag anything.
  bool usable() const { return n >= 2; }
  double threshold() const { return mean - sd; }
  /// Strictly below mean - 1 sd.
  bool abnormal(double reading) const { return usable() && reading < threshold(); }
};

LungBaseline lung_baseline(std::span<const LungFunctionReading> readings, LungMetric metric);

struct Baselines {
  LungBaseline pef;
  LungBaseline fev1;
};

/// Baselines over the readings inside `window` (the whole deployment unless
/// a narrower window is configured).
Baselines compute_baselines(const StoreSnapshot& snap, const std::string& patient_id,
                            DateRange window);

/// Episode criteria. The first six mirror `Symptom`.
enum class Criterion : std::uint8_t {
  cough,
  wheeze,
  chest_tightness,
  hard_fast_breathing,
  cant_talk_full_sentences,
  nose_opens_wide,
  night_awakening,
  activity_limitation,
  rescue_medication,
  abnormal_pef,
  abnormal_fev1,
};
inline constexpr std::size_t kCriterionCount = 11;

/// "symptom:cough", "night_awakening", "abnormal_pef", ...
std::string to_string(Criterion c);
Criterion criterion_of(Symptom s);

class CriterionSet {
 public:
  void insert(Criterion c) { mask_ |= bit(c); }
  bool contains(Criterion c) const { return (mask_ & bit(c)) != 0; }
  bool empty() const { return mask_ == 0; }
  std::uint16_t mask() const { return mask_; }
  std::vector<Criterion> items() const;

  friend bool operator==(CriterionSet, CriterionSet) = default;

 private:
  static constexpr std::uint16_t bit(Criterion c) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(c));
  }
  std::uint16_t mask_ = 0;
};

struct EpisodeFlag {
  std::string patient_id;
  Date date;
  CriterionSet reasons;

  bool is_episode() const { return !reasons.empty(); }
};

/// Throws Error{unanswered_day}: unanswered days are excluded upstream.
EpisodeFlag detect_episode(const DayRecord& day, const Baselines& baselines);

struct ComplianceReport {
  std::string patient_id;
  DateRange range;
  double controller_compliance = 0;
  int answered_days = 0;  // days the controller question was answered
  int compliant_days = 0;
};

/// A day is compliant if any slot reported the controller taken.
ComplianceReport compliance(const std::string& patient_id, DateRange range,
                            std::span<const DayRecord> days);
ComplianceReport compliance(const StoreSnapshot& snap, const std::string& patient_id,
                            DateRange range);

struct Eligibility {
  bool included = false;
  double answer_rate = 0;
};

inline constexpr double kDefaultEligibilityThreshold = 0.20;

/// Excluded iff answer_rate < threshold.
Eligibility eligibility(double answer_rate, double threshold = kDefaultEligibilityThreshold);
Eligibility eligibility(const StoreSnapshot& snap, const std::string& patient_id,
                        double threshold = kDefaultEligibilityThreshold);

struct PatientSummary {
  std::string patient_id;
  DateRange range;
  int answered_days = 0;
  int episode_days = 0;
  std::array<int, kSymptomCount> symptom_days{};
  int any_symptom_days = 0;
  int night_awakening_days = 0;
  int activity_limited_days = 0;
  int rescue_days = 0;
  int abnormal_pef_days = 0;
  int abnormal_fev1_days = 0;
  int abnormal_lung_days = 0;
  ComplianceReport compliance;

  int symptom(Symptom s) const { return symptom_days[static_cast<std::size_t>(s)]; }
};

/// Symptoms in presentation order, most severe first. Reporting only.
std::span<const Symptom> symptom_display_order();

PatientSummary patient_summary(const std::string& patient_id, DateRange range,
                               std::span<const DayRecord> days, const Baselines& baselines);
PatientSummary patient_summary(const StoreSnapshot& snap, const std::string& patient_id,
                               DateRange range);

}  // namespace airway
