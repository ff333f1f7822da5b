#include "airway/report.hpp"

#include <cmath>

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string range_cell(const std::optional<ValueRange>& r) {
  if (!r) return "n/a";
  return fmt::format("{} to {}", num(r->min), num(r->max));
}

std::string column_title(std::string_view prefix, const TriggerReport& r) {
  return fmt::format("{}{} ({} to {})", prefix,
                     r.period.label == PeriodLabel::learning ? "Learning" : "Prediction",
                     format_date(r.period.range.first), format_date(r.period.range.last));
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string percent(double fraction) {
  return fmt::format("{}%", static_cast<long>(std::floor(fraction * 100.0 + 0.5)));
}

PatientReport build_patient_report(const StoreSnapshot& snap, const std::string& patient_id,
                                   const AnalysisParams& params, const ReportOptions& options) {
  auto tl = load_timeline(snap, patient_id, params);
  auto span = tl.analyzed_span();
  if (span.empty()) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("{} answered no questionnaires", patient_id));
  }

  PatientReport out;
  out.patient_id = patient_id;

  auto split_of = [&](DateRange range) {
    std::optional<Date> boundary = options.learning_end;
    if (!boundary && options.learning_days) boundary = add_days(range.first, *options.learning_days);
    return split_periods(patient_id, range, boundary, params.learning_fraction);
  };

  std::vector<std::pair<std::string, DateRange>> parts;
  if (options.split_by_pollen && !options.learning_end) {
    for (auto& seg : segment_by_pollen(tl, params)) {
      DateRange r{seg.range.first, std::min(seg.range.last, span.last)};
      if (r.empty()) continue;
      parts.emplace_back(seg.state == PollenState::present ? "Pollen present, " : "Pollen absent, ",
                         r);
    }
  }
  if (parts.size() <= 1) parts = {{"", span}};

  for (auto& [prefix, range] : parts) {
    auto split = split_of(range);
    for (auto* period : {&split.learning, &split.prediction}) {
      auto r = period_report(tl, *period, params);
      out.columns.push_back({column_title(prefix, r), std::move(r)});
    }
  }

  try {
    auto split = split_of(span);
    if (params.baseline_learning_only) {
      auto tl2 = load_timeline(snap, patient_id, params, split.learning.range);
      out.evaluation = learn_and_predict(tl2, split.learning, split.prediction, params);
    } else {
      out.evaluation = learn_and_predict(tl, split.learning, split.prediction, params);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_episodes && e.code() != ErrorCode::insufficient_data) {
      throw;
    }
    out.evaluation_note = fmt::format("{}: {}", to_string(e.code()), e.what());
  }

  auto baselines = tl.baselines();
  auto days = snap.day_records(patient_id, span);
  out.summary = patient_summary(patient_id, span, days, baselines);
  return out;
}

std::vector<std::pair<std::string, Table>> report_tables(const PatientReport& report) {
  std::vector<std::pair<std::string, Table>> out;

  Table triggers;
  std::vector<std::string> header{"Parameter"};
  for (auto& c : report.columns) header.push_back(c.title);
  triggers.push_back(header);
  for (auto t : kAllTriggers) {
    std::vector<std::string> row{std::string(display_name(t))};
    for (auto& c : report.columns) row.push_back(std::to_string(c.report.unhealthy(t)));
    triggers.push_back(row);
  }
  std::vector<std::string> episodes{"Asthma episodes"};
  for (auto& c : report.columns) episodes.push_back(std::to_string(c.report.episode_days));
  triggers.push_back(episodes);
  std::vector<std::string> temp{"Temperature (F)"};
  std::vector<std::string> hum{"Humidity (%)"};
  for (auto& c : report.columns) {
    temp.push_back(range_cell(c.report.temp_range));
    hum.push_back(range_cell(c.report.humidity_range));
  }
  triggers.push_back(temp);
  triggers.push_back(hum);
  out.emplace_back("Unhealthy days per period", std::move(triggers));

  Table contributors{header};
  for (auto t : kAllTriggers) {
    std::vector<std::string> row{std::string(display_name(t))};
    for (auto& c : report.columns) row.push_back(std::to_string(c.report.contributors(t)));
    contributors.push_back(row);
  }
  std::vector<std::string> majors{"Major triggers"};
  for (auto& c : report.columns) {
    std::string cell;
    for (auto t : c.report.major_triggers) {
      if (!cell.empty()) cell += " > ";
      cell += display_name(t);
    }
    majors.push_back(cell.empty() ? "none" : cell);
  }
  contributors.push_back(majors);
  out.emplace_back("Episode days with the parameter unhealthy that day or the day before",
                   std::move(contributors));

  Table eval{{"Measure", "Value"}};
  if (report.evaluation) {
    auto& e = *report.evaluation;
    std::string learned;
    for (auto t : e.learned) {
      if (!learned.empty()) learned += " > ";
      learned += display_name(t);
    }
    eval.push_back({"Learned triggers", learned});
    eval.push_back({"Prediction episode days", std::to_string(e.episode_days)});
    eval.push_back({"Explained by a learned trigger", std::to_string(e.hit_days)});
    eval.push_back({"Unexplained", std::to_string(e.unexplained.size())});
    for (auto& u : e.unexplained) {
      std::string note = "no prolonged exposure";
      if (!u.prolonged.empty()) {
        note = "prolonged exposure:";
        for (auto t : u.prolonged) note += fmt::format(" {}", display_name(t));
      }
      eval.push_back({fmt::format("Unexplained {}", format_date(u.date)), note});
    }
    eval.push_back({"Non-episode days with a learned trigger unhealthy",
                    std::to_string(e.false_alarm_days)});
  } else {
    eval.push_back({"Not evaluated", report.evaluation_note});
  }
  out.emplace_back("Learning and prediction", std::move(eval));

  auto& s = report.summary;
  Table summary{{"Measure", "Days"}};
  summary.push_back({"Answered", std::to_string(s.answered_days)});
  summary.push_back({"Asthma episodes", std::to_string(s.episode_days)});
  summary.push_back({"Any symptom", std::to_string(s.any_symptom_days)});
  for (auto sym : symptom_display_order()) {
    summary.push_back({fmt::format("Symptom: {}", to_string(sym)), std::to_string(s.symptom(sym))});
  }
  summary.push_back({"Night awakening", std::to_string(s.night_awakening_days)});
  summary.push_back({"Activity limitation", std::to_string(s.activity_limited_days)});
  summary.push_back({"Rescue medication", std::to_string(s.rescue_days)});
  summary.push_back({"Abnormal lung function", std::to_string(s.abnormal_lung_days)});
  summary.push_back({"Controller taken",
                     fmt::format("{} of {} ({})", s.compliance.compliant_days,
                                 s.compliance.answered_days,
                                 percent(s.compliance.controller_compliance))});
  out.emplace_back("Summary", std::move(summary));
  return out;
}

std::vector<std::pair<std::string, Table>> cohort_tables(const std::vector<CohortSummary>& seasons) {
  Table t{{"Season", "Patients analyzed", "Pollen", "PM2.5", "Ozone", "No episodes"}};
  for (auto& s : seasons) {
    t.push_back({std::string(to_string(s.season)), std::to_string(s.patients_analyzed),
                 percent(s.fraction(Trigger::pollen)), percent(s.fraction(Trigger::pm25)),
                 percent(s.fraction(Trigger::ozone)), percent(s.no_episode_fraction)});
  }
  return {{"Top-ranked major trigger by season", std::move(t)}};
}

std::string render_markdown(const std::string& title,
                            const std::vector<std::pair<std::string, Table>>& tables) {
  std::string out = fmt::format("# {}\n", title);
  for (auto& [name, table] : tables) {
    out += fmt::format("\n## {}\n\n", name);
    for (std::size_t i = 0; i < table.size(); ++i) {
      out += "|";
      for (auto& cell : table[i]) out += fmt::format(" {} |", cell);
      out += "\n";
      if (i == 0) {
        out += "|";
        for (std::size_t k = 0; k < table[i].size(); ++k) out += k == 0 ? "---|" : "---:|";
        out += "\n";
      }
    }
  }
  return out;
}

std::string render_csv(const std::vector<std::pair<std::string, Table>>& tables) {
  std::string out;
  for (std::size_t n = 0; n < tables.size(); ++n) {
    if (n > 0) out += "\n";
    out += csv_cell(tables[n].first) + "\n";
    for (auto& row : tables[n].second) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k > 0) out += ",";
        out += csv_cell(row[k]);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace airway
