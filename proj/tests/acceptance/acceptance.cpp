// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// failed.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "airway/episode.hpp"
#include "airway/gateway.hpp"
#include "airway/report.hpp"
#include "airway/simulator.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/scenario.hpp"

using namespace airway;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> row(const Table& t, const std::string& label) {
  for (auto& r : t) {
    if (!r.empty() && r[0] == label) return {r.begin() + 1, r.end()};
  }
  return {};
}

std::string join(const std::vector<std::string>& xs) {
  return fmt::format("{}", fmt::join(xs, "/"));
}

Outcome winter_patient() {
  auto t0 = Clock::now();
  auto store = fixtures::load_all({fixtures::patient_b()});
  auto tables = report_tables(build_patient_report(store.snapshot(), "patient-b"));
  auto pm = row(tables[0].second, "PM2.5");
  auto ep = row(tables[0].second, "Asthma episodes");
  double secs = seconds_since(t0);
  bool ok = pm == std::vector<std::string>{"21", "19"} &&
            ep == std::vector<std::string>{"24", "21"} && secs < 5.0;
  return {ok, fmt::format("pm25 {} episodes {} in {:.2f}s", join(pm), join(ep), secs)};
}

Outcome segmented_patient() {
  auto s = fixtures::patient_a();
  auto store = fixtures::load_all({s});
  auto snap = store.snapshot();
  auto segments = segment_by_pollen(snap, "patient-a");
  bool split = segments.size() == 2 && segments[0].range.days() == 42 &&
               segments[1].range.days() == 49 && segments[1].state == PollenState::present;
  ReportOptions opts;
  opts.learning_days = 28;
  auto tables = report_tables(build_patient_report(snap, "patient-a", {}, opts));
  auto& t = tables[0].second;
  std::vector<std::string> cells;
  for (auto* label : {"Pollen", "PM2.5", "Ozone"}) {
    for (auto& c : row(t, label)) cells.push_back(c);
  }
  std::vector<std::string> expected{"0", "0", "17", "3", "20", "5", "14", "2", "1", "0", "0", "1"};
  auto ep = row(t, "Asthma episodes");
  bool ok = split && cells == expected && ep == std::vector<std::string>{"21", "5", "17", "3"};
  return {ok, fmt::format("segments {} counts {} episodes {}", segments.size(), join(cells),
                          join(ep))};
}

Outcome prediction_patient() {
  auto s = fixtures::patient_c();
  auto store = fixtures::load_all({s});
  ReportOptions opts;
  opts.learning_end = s.date(29);
  auto rep = build_patient_report(store.snapshot(), "patient-c", {}, opts);
  auto tables = report_tables(rep);
  auto& t = tables[0].second;
  std::vector<std::string> cells;
  for (auto* label : {"Pollen", "PM2.5", "Ozone", "Asthma episodes"}) {
    for (auto& c : row(t, label)) cells.push_back(c);
  }
  std::vector<std::string> expected{"11", "10", "8", "10", "2", "6", "12", "5"};
  bool ok = cells == expected && rep.columns.size() == 2 &&
            rep.columns[1].report.unhealthy(Trigger::pollen) > rep.columns[1].report.episode_days;
  return {ok, fmt::format("counts {}", join(cells))};
}

Outcome cohort() {
  auto winter = fixtures::load_all(fixtures::winter_cohort());
  auto w = cohort_summary(winter.snapshot(), Season::winter);
  auto spring = fixtures::load_all(fixtures::spring_cohort());
  auto s = cohort_summary(spring.snapshot(), Season::spring);
  bool ok = w.patients_analyzed == 10 && w.top_trigger_patients[1] == 8 &&
            percent(w.fraction(Trigger::pm25)) == "80%" &&
            percent(s.fraction(Trigger::pollen)) == "63%" &&
            percent(s.fraction(Trigger::pm25)) == "19%" &&
            s.top_trigger_patients[0] * 16 == 10 * s.patients_analyzed;
  return {ok, fmt::format("winter pm25 {} of {}, spring pollen {} pm25 {}",
                          w.top_trigger_patients[1], w.patients_analyzed,
                          percent(s.fraction(Trigger::pollen)), percent(s.fraction(Trigger::pm25)))};
}

Outcome episode_oracle() {
  auto t0 = Clock::now();
  std::vector<LungFunctionReading> base;
  std::vector<double> pef{280, 300, 320}, fev1{2.0, 2.5, 3.0};
  for (int i = 0; i < 3; ++i) {
    base.push_back({"p", start_of(parse_date("2018-01-01")) + std::chrono::minutes{i}, pef[i],
                    fev1[i]});
  }
  Baselines b{lung_baseline(base, LungMetric::pef), lung_baseline(base, LungMetric::fev1)};
  auto ps = oracles::stats(pef);
  auto fs = oracles::stats(fev1);
  std::vector<std::vector<LungPair>> lung{{}};
  for (double v : {279.9, 280.0, 280.1}) lung.push_back({{v, 2.5}});
  for (double v : {1.99, 2.0, 2.01}) lung.push_back({{300, v}});

  int cases = 0, mismatches = 0;
  for (unsigned mask = 0; mask < 64; ++mask) {
    for (unsigned flags = 0; flags < 8; ++flags) {
      for (auto& readings : lung) {
        DayRecord d;
        d.patient_id = "p";
        d.answered = true;
        d.symptoms_union = SymptomSet{static_cast<std::uint8_t>(mask)};
        d.rescue_taken = flags & 1u;
        d.night_awakening = (flags & 2u) != 0;
        d.activity_limited = flags & 4u;
        d.lung_readings = readings;
        oracles::EpisodeInput in{static_cast<std::uint8_t>(mask), (flags & 1u) != 0,
                                 (flags & 2u) != 0, (flags & 4u) != 0, {}, {}};
        for (auto& r : readings) {
          in.pef.push_back(r.pef);
          in.fev1.push_back(r.fev1);
        }
        mismatches += detect_episode(d, b).is_episode() != oracles::episode(in, ps, fs);
        ++cases;
      }
    }
  }
  double secs = seconds_since(t0);
  return {mismatches == 0 && cases == 64 * 8 * 7 && secs < 10.0,
          fmt::format("{} cases, {} mismatches, {:.2f}s", cases, mismatches, secs)};
}

Outcome attribution_oracle() {
  auto t0 = Clock::now();
  int qualifying = 0, matches = 0;
  std::vector<std::string> misses;
  std::uint64_t seed = 1;
  const std::array<Season, 4> seasons{Season::winter, Season::spring, Season::summer,
                                      Season::fall};
  while (qualifying < 100 && seed < 400) {
    CohortSpec spec;
    spec.season = seasons[seed % 4];
    spec.patients = 10;
    spec.seed = seed++;
    auto cohort = simulate_cohort(spec);
    auto store = ObservationStore::in_memory();
    cohort.load_into(store);
    auto snap = store.snapshot();
    for (auto& gt : cohort.truth) {
      if (qualifying == 100) break;
      auto planted = gt.planted();
      if (!planted || gt.sensitivity[static_cast<std::size_t>(*planted)] < 0.7) continue;
      auto m = cohort_member(snap, gt.profile.patient_id);
      if (!m.eligibility.included || m.learning_episode_days < 8) continue;
      ++qualifying;
      if (m.top_trigger() == planted) {
        ++matches;
      } else {
        auto top = m.top_trigger();
        misses.push_back(fmt::format("{}({}->{})", gt.profile.patient_id, to_string(*planted),
                                     top ? to_string(*top) : "none"));
      }
    }
  }
  double secs = seconds_since(t0);
  return {qualifying == 100 && matches >= 95 && secs < 60.0,
          fmt::format("{} of {} match, {:.1f}s{}", matches, qualifying, secs,
                      misses.empty() ? "" : fmt::format(", misses {}", fmt::join(misses, " ")))};
}

Outcome sync_properties() {
  gen::Gen g(20180101);
  TokenRegistry reg;
  reg.add({"tok", "p", parse_timestamp("2100-01-01T00:00:00Z")});
  int violations = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    auto batch = gen::batch(g, "p", "r", add_days(parse_date("2018-01-01"), g.range(0, 60)),
                            g.range(1, 40));

    auto once = ObservationStore::in_memory();
    auto many = ObservationStore::in_memory();
    SyncGateway a(once, reg);
    SyncGateway b(many, reg);
    a.ingest_batch("p", batch);
    int k = g.range(2, 4);
    auto shuffled = batch;
    for (int i = 0; i < k; ++i) {
      g.shuffle(shuffled);
      b.ingest_batch("p", shuffled);
    }
    auto reference = once.snapshot().export_ndjson();
    violations += many.snapshot().export_ndjson() != reference;

    std::vector<OfflineInterval> outages;
    Timestamp t = start_of(add_days(parse_date("2018-01-01"), -1));
    int n = g.range(0, 5);
    for (int i = 0; i < n; ++i) {
      t += std::chrono::hours{g.range(1, 400)};
      auto len = std::chrono::hours{g.range(1, 96)};
      outages.push_back({t, t + len});
      t += len;
    }
    ReplayOptions opts;
    opts.sync_interval = std::chrono::minutes{g.range(5, 240)};
    opts.max_batch = static_cast<std::size_t>(g.range(1, 20));
    opts.resend_overlap = static_cast<std::size_t>(g.range(0, 3));
    auto faulted = ObservationStore::in_memory();
    SyncGateway f(faulted, reg);
    replay_device(batch, f, "tok", FaultSchedule(outages), opts);
    violations += faulted.snapshot().export_ndjson() != reference;
  }
  return {violations == 0, fmt::format("{} trials, {} violations", trials, violations)};
}

Outcome eligibility_boundary() {
  bool ok = !eligibility(0.19).included && eligibility(0.20).included &&
            eligibility(0.505).included && eligibility(46.0 / 91.0).included;
  return {ok, "0.19 excluded, 0.20 and 0.505 included"};
}

Outcome daily_aggregation() {
  gen::Gen g(99);
  int days = 0, mismatches = 0;
  Date first = parse_date("2017-06-01");
  auto store = ObservationStore::in_memory();
  std::vector<EnvironmentSample> all;
  for (int block = 0; block < 100; ++block) {
    std::vector<Observation> batch;
    std::vector<EnvironmentSample> samples;
    for (int d = 0; d < 100; ++d) {
      Timestamp t0 = start_of(add_days(first, block * 100 + d));
      for (int h = 0; h < 24; ++h) {
        for (auto p : {EnvParameter::pollen, EnvParameter::pm25, EnvParameter::ozone}) {
          if (p == EnvParameter::pollen && h % 12 != 0) continue;
          if (g.coin(0.1)) continue;
          samples.push_back({"r", t0 + std::chrono::hours{h}, p, g.reading(0, 150)});
        }
      }
    }
    for (auto& s : samples) batch.push_back(make_observation(s, s.timestamp));
    store.upsert_batch(batch);
    auto snap = store.snapshot();
    for (int d = 0; d < 100; ++d) {
      Date date = add_days(first, block * 100 + d);
      auto agg = snap.daily_aggregate("r", date);
      Timestamp from = start_of(date);
      Timestamp to = from + 24h;
      mismatches += agg.pollen_max != oracles::scan_max(samples, "r", EnvParameter::pollen, from, to);
      mismatches += agg.pm25_max != oracles::scan_max(samples, "r", EnvParameter::pm25, from, to);
      mismatches += agg.ozone_max != oracles::scan_max(samples, "r", EnvParameter::ozone, from, to);
      ++days;
    }
  }
  return {mismatches == 0 && days == 10'000,
          fmt::format("{} days, {} mismatches", days, mismatches)};
}

Outcome prolonged_boundary() {
  int wrong = 0;
  const int m = 5;
  for (std::uint32_t window = 0; window < 128; ++window) {
    std::array<bool, 7> days{};
    for (int i = 0; i < 7; ++i) days[static_cast<std::size_t>(i)] = (window >> i) & 1u;
    wrong += prolonged_exposure(days, m) != oracles::prolonged(window, m);
  }
  return {wrong == 0, fmt::format("128 windows, {} misclassified", wrong)};
}

}  // namespace

int main() {
  std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"winter-patient-reproduction", winter_patient},
      {"segmented-patient-reproduction", segmented_patient},
      {"prediction-period-reproduction", prediction_patient},
      {"cohort-distribution", cohort},
      {"episode-detection-oracle", episode_oracle},
      {"attribution-oracle", attribution_oracle},
      {"sync-properties", sync_properties},
      {"eligibility-boundary", eligibility_boundary},
      {"daily-aggregation", daily_aggregation},
      {"prolonged-exposure-boundary", prolonged_boundary},
  };
  int failed = 0;
  for (auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
