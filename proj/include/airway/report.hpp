#pragma once

#include <optional>
#include <string>
#include <vector>

#include "airway/attribution.hpp"
#include "airway/episode.hpp"
#include "airway/store.hpp"

namespace airway {

struct ReportOptions {
  std::optional<Date> learning_end;  // first prediction day
  std::optional<int> learning_days;  // per analyzed segment
  bool split_by_pollen = true;       // one learning/prediction pair per pollen segment
};

struct ReportColumn {
  std::string title;
  TriggerReport report;
};

struct PatientReport {
  std::string patient_id;
  std::vector<ReportColumn> columns;
  /// Learn/predict over the whole analyzed span; empty with a reason when
  /// the learning period is too sparse.
  std::optional<PredictionEvaluation> evaluation;
  std::string evaluation_note;
  PatientSummary summary;
};

/// Throws Error{insufficient_data} when the patient has no answered days.
PatientReport build_patient_report(const StoreSnapshot& snap, const std::string& patient_id,
                                   const AnalysisParams& params = {},
                                   const ReportOptions& options = {});

/// Rows are tables of cells; the first row is the header. Markdown and CSV
/// render the same tables.
using Table = std::vector<std::vector<std::string>>;

std::vector<std::pair<std::string, Table>> report_tables(const PatientReport& report);
std::vector<std::pair<std::string, Table>> cohort_tables(const std::vector<CohortSummary>& seasons);

std::string render_markdown(const std::string& title,
                            const std::vector<std::pair<std::string, Table>>& tables);
std::string render_csv(const std::vector<std::pair<std::string, Table>>& tables);

/// Whole-number percentage, halves rounded up ("63%").
std::string percent(double fraction);

}  // namespace airway
