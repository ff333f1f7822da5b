#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airway/alert.hpp"
#include "airway/attribution.hpp"
#include "airway/store.hpp"

namespace airway {

/// Alerts for one patient on `date`. `forecast` is the next-day aggregate of
/// the patient's region, `yesterday` the record of date - 1. Output is sorted
/// by key with duplicates removed.
std::vector<Alert> evaluate_alerts(const PatientProfile& profile, Date date,
                                   std::span<const Trigger> learned,
                                   const DailyEnvAggregate& forecast, const DayRecord& yesterday,
                                   const HealthyRanges& ranges = {});

/// Major triggers of the patient's default learning period; empty when the
/// patient has nothing to learn from.
std::vector<Trigger> learned_triggers(const StoreSnapshot& snap, const std::string& patient_id,
                                      const AnalysisParams& params = {});

/// Evaluates one patient-day against the store (the forecast is whatever
/// outdoor data is stored for date + 1) and materializes the result.
/// Returns the evaluated alerts, including ones that already existed.
std::vector<Alert> run_alerts(ObservationStore& store, const std::string& patient_id, Date date,
                              const AnalysisParams& params = {});

}  // namespace airway
