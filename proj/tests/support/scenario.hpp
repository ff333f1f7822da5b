#pragma once

#include <optional>
#include <string>
#include <vector>

#include "airway/model.hpp"
#include "airway/ranges.hpp"
#include "airway/store.hpp"

namespace fixtures {

using namespace airway;

/// Daily environment; samples are laid out so these are the day's extremes.
struct EnvDay {
  double pollen = 0;
  double pm25 = 20;
  double ozone = 20;
  double temp_min = 30;
  double temp_max = 50;
  double hum_min = 40;
  double hum_max = 80;
};

struct DaySpec {
  bool answered = false;
  SymptomSet symptoms;
  int rescue = 0;
  std::optional<bool> controller;
  bool activity = false;
  bool awakening = false;
  bool abnormal_lung = false;
  bool lung = true;  // two readings on answered days
  std::vector<std::string> oral_steroid;
  EnvDay env;
};

class Scenario {
 public:
  PatientProfile profile;
  std::vector<DaySpec> days;     // deployment days, day 1 first
  std::vector<EnvDay> lead_in;   // environment before day 1, oldest first
  std::vector<EnvDay> trailing;  // environment after the last day

  Date date(int day) const { return add_days(profile.deployment_start, day - 1); }
  DaySpec& day(int d) { return days.at(static_cast<std::size_t>(d - 1)); }
  const DaySpec& day(int d) const { return days.at(static_cast<std::size_t>(d - 1)); }
  int length() const { return static_cast<int>(days.size()); }

  std::vector<Observation> environment() const;
  std::vector<Observation> patient_stream() const;
  std::vector<Observation> observations() const;
  void load(ObservationStore& store) const;
  /// Profile line followed by every observation.
  std::string ndjson() const;
};

Scenario make_scenario(const std::string& id, const std::string& region, Date start, int days);

inline constexpr double kNormalPef = 300;
inline constexpr double kNormalFev1 = 2.5;

// Published patients. Day numbers in comments are 1-based.
Scenario patient_a();
Scenario patient_b();
Scenario patient_c();
Scenario patient_d();

/// 30 answered days; 10 episodes in the first 20 with `trigger` unhealthy
/// exactly on those days; no episodes at all when `trigger` is empty.
Scenario single_trigger_patient(const std::string& id, Date start, std::optional<Trigger> trigger,
                                double answer_rate = 1.0);

std::vector<Scenario> winter_cohort();  // 10 eligible: 8 pm25, 2 ozone; 1 ineligible
std::vector<Scenario> spring_cohort();  // 16: 10 pollen, 3 pm25, 1 ozone, 2 without episodes

ObservationStore load_all(const std::vector<Scenario>& scenarios);

}  // namespace fixtures
