#include <doctest.h>

#include <set>

#include "airway/episode.hpp"
#include "airway/error.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/scenario.hpp"

using namespace airway;

namespace {

LungFunctionReading reading(double pef, double fev1, int minute = 0) {
  return {"p", start_of(parse_date("2018-01-01")) + std::chrono::minutes{minute}, pef, fev1};
}

// Baseline readings with exact mean and sd: PEF 300 +- 20, FEV1 2.5 +- 0.5.
std::vector<LungFunctionReading> baseline_readings() {
  return {reading(280, 2.0, 1), reading(300, 2.5, 2), reading(320, 3.0, 3)};
}

Baselines exact_baselines() {
  auto rs = baseline_readings();
  return {lung_baseline(rs, LungMetric::pef), lung_baseline(rs, LungMetric::fev1)};
}

DayRecord answered_day() {
  DayRecord d;
  d.patient_id = "p";
  d.date = parse_date("2018-01-05");
  d.answered = true;
  return d;
}

}  // namespace

TEST_SUITE("episode") {
  TEST_CASE("baseline has exact mean and sample sd") {
    auto b = exact_baselines();
    CHECK(b.pef.mean == 300);
    CHECK(b.pef.sd == 20);
    CHECK(b.pef.threshold() == 280);
    CHECK(b.fev1.threshold() == 2.0);
    CHECK(b.pef.usable());

    std::vector<LungFunctionReading> one{reading(300, 2.5)};
    auto single = lung_baseline(one, LungMetric::pef);
    CHECK_FALSE(single.usable());
    CHECK_FALSE(single.abnormal(1));
    CHECK(lung_baseline({}, LungMetric::fev1).n == 0);
  }

  TEST_CASE("threshold is strict") {
    auto b = exact_baselines();
    CHECK(b.pef.abnormal(279.9));
    CHECK_FALSE(b.pef.abnormal(280));
    CHECK_FALSE(b.pef.abnormal(280.1));
  }

  TEST_CASE("detection equals the brute-force definition over the full cross-product") {
    auto baselines = exact_baselines();
    std::vector<double> pef_values{280, 300, 320};
    std::vector<double> fev1_values{2.0, 2.5, 3.0};
    auto pef_stats = oracles::stats(pef_values);
    auto fev1_stats = oracles::stats(fev1_values);

    // Lung case: none, below, at, above the threshold; applied to PEF or FEV1.
    struct LungCase {
      std::vector<LungPair> readings;
    };
    std::vector<LungCase> cases{{{}}};
    for (double pef : {279.9, 280.0, 280.1}) cases.push_back({{{pef, 2.5}}});
    for (double fev1 : {1.99, 2.0, 2.01}) cases.push_back({{{300, fev1}}});

    int mismatches = 0;
    int evaluated = 0;
    for (unsigned mask = 0; mask < 64; ++mask) {
      for (unsigned flags = 0; flags < 8; ++flags) {
        for (auto& lc : cases) {
          auto day = answered_day();
          day.symptoms_union = SymptomSet{static_cast<std::uint8_t>(mask)};
          day.rescue_taken = flags & 1u;
          day.night_awakening = (flags & 2u) != 0;
          day.activity_limited = flags & 4u;
          day.lung_readings = lc.readings;

          oracles::EpisodeInput in;
          in.symptoms = static_cast<std::uint8_t>(mask);
          in.rescue = flags & 1u;
          in.awakening = flags & 2u;
          in.activity = flags & 4u;
          for (auto& r : lc.readings) {
            in.pef.push_back(r.pef);
            in.fev1.push_back(r.fev1);
          }
          auto flag = detect_episode(day, baselines);
          bool expect = oracles::episode(in, pef_stats, fev1_stats);
          mismatches += flag.is_episode() != expect;
          mismatches += flag.is_episode() == flag.reasons.empty();
          ++evaluated;
        }
      }
    }
    CHECK(evaluated == 64 * 8 * 7);
    CHECK(mismatches == 0);
  }

  TEST_CASE("reasons name each criterion") {
    auto b = exact_baselines();
    auto day = answered_day();
    day.symptoms_union = {Symptom::wheeze, Symptom::nose_opens_wide};
    day.rescue_taken = true;
    day.lung_readings = {{250, 1.5}};
    auto flag = detect_episode(day, b);
    std::vector<std::string> names;
    for (auto c : flag.reasons.items()) names.push_back(to_string(c));
    CHECK(names == std::vector<std::string>{"symptom:wheeze", "symptom:nose_opens_wide",
                                            "rescue_medication", "abnormal_pef", "abnormal_fev1"});
  }

  TEST_CASE("unanswered days are not evaluated") {
    DayRecord d;
    d.patient_id = "p";
    d.date = parse_date("2018-01-05");
    d.symptoms_union = {Symptom::cough};
    try {
      detect_episode(d, exact_baselines());
      FAIL("expected unanswered_day");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unanswered_day);
    }
  }

  TEST_CASE("adding a criterion never clears an episode") {
    gen::Gen g(11);
    auto b = exact_baselines();
    for (int i = 0; i < 3000; ++i) {
      auto day = answered_day();
      day.symptoms_union = SymptomSet{static_cast<std::uint8_t>(g.range(0, 63))};
      day.rescue_taken = g.coin(0.3);
      day.activity_limited = g.coin(0.3);
      if (g.coin(0.5)) day.night_awakening = g.coin(0.3);
      if (g.coin(0.5)) day.lung_readings.push_back({g.reading(250, 330), g.reading(1.5, 3.2)});
      bool before = detect_episode(day, b).is_episode();
      switch (g.range(0, 4)) {
        case 0: day.symptoms_union.insert(kAllSymptoms[static_cast<std::size_t>(g.range(0, 5))]); break;
        case 1: day.rescue_taken = true; break;
        case 2: day.activity_limited = true; break;
        case 3: day.night_awakening = true; break;
        default: day.lung_readings.push_back({200, 1.0}); break;
      }
      bool after = detect_episode(day, b).is_episode();
      CHECK((!before || after));
      CHECK(after);
    }
  }

  TEST_CASE("severity order is for display only") {
    auto b = exact_baselines();
    for (auto s : kAllSymptoms) {
      auto day = answered_day();
      day.symptoms_union = {s};
      CHECK(detect_episode(day, b).is_episode());
    }
    auto order = symptom_display_order();
    REQUIRE(order.size() == kSymptomCount);
    CHECK(order[0] == Symptom::chest_tightness);
    std::set<Symptom> distinct(order.begin(), order.end());
    CHECK(distinct.size() == kSymptomCount);
  }

  TEST_CASE("baseline does not depend on reading order") {
    gen::Gen g(3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<LungFunctionReading> rs;
      int n = g.range(2, 60);
      for (int i = 0; i < n; ++i) rs.push_back(reading(g.reading(150, 650), g.reading(0.8, 5), i));
      auto a = lung_baseline(rs, LungMetric::pef);
      auto af = lung_baseline(rs, LungMetric::fev1);
      g.shuffle(rs);
      auto b = lung_baseline(rs, LungMetric::pef);
      auto bf = lung_baseline(rs, LungMetric::fev1);
      CHECK(a.mean == b.mean);
      CHECK(a.sd == b.sd);
      CHECK(af.mean == bf.mean);
      CHECK(af.sd == bf.sd);
      CHECK(a.sd >= 0);
    }
  }

  TEST_CASE("compliance counts days the controller question was answered") {
    std::vector<DayRecord> days(5, answered_day());
    for (int i = 0; i < 5; ++i) days[static_cast<std::size_t>(i)].date = add_days(parse_date("2018-01-01"), i);
    days[0].controller_asked = true;
    days[0].controller_taken = true;
    days[1].controller_asked = true;
    days[2].controller_asked = false;
    days[3].answered = false;
    days[3].controller_asked = true;
    days[4].controller_asked = true;
    days[4].controller_taken = true;
    auto r = compliance("p", {days[0].date, days[4].date}, days);
    CHECK(r.answered_days == 3);
    CHECK(r.compliant_days == 2);
    CHECK(r.controller_compliance == doctest::Approx(2.0 / 3.0));
    CHECK(r.compliant_days <= r.answered_days);

    auto none = compliance("p", {days[2].date, days[2].date}, days);
    CHECK(none.answered_days == 0);
    CHECK(none.controller_compliance == 0);
  }

  TEST_CASE("eligibility boundary") {
    CHECK_FALSE(eligibility(0.19).included);
    CHECK(eligibility(0.20).included);
    CHECK(eligibility(0.505).included);
    CHECK(eligibility(46.0 / 91.0).included);
    CHECK_FALSE(eligibility(0.0).included);
    CHECK(eligibility(0.5, 0.6).included == false);
  }

  TEST_CASE("answer rates from stored questionnaires") {
    auto a = fixtures::patient_a();
    auto store = fixtures::load_all({a});
    CHECK(store.snapshot().answer_rate("patient-a") == doctest::Approx(46.0 / 91.0));
    CHECK(eligibility(store.snapshot(), "patient-a").included);

    auto empty = fixtures::make_scenario("silent", "region-x", parse_date("2018-01-01"), 30);
    auto six = fixtures::make_scenario("six", "region-y", parse_date("2018-01-01"), 30);
    for (int d = 1; d <= 6; ++d) six.day(d).answered = true;
    auto store2 = fixtures::load_all({empty, six});
    auto snap = store2.snapshot();
    CHECK(snap.answer_rate("silent") == 0);
    CHECK(snap.answer_rate("six") == doctest::Approx(0.2));
    CHECK(eligibility(snap, "six").included);
    CHECK_FALSE(eligibility(snap, "silent").included);
  }

  TEST_CASE("patient summaries of the four published patients") {
    auto store = fixtures::load_all(
        {fixtures::patient_a(), fixtures::patient_b(), fixtures::patient_c(), fixtures::patient_d()});
    auto snap = store.snapshot();
    auto summary = [&](const std::string& id) {
      return patient_summary(snap, id, snap.profile(id).deployment());
    };
    auto symptom = [](const PatientSummary& s, Symptom sym) {
      return s.symptom_days[static_cast<std::size_t>(sym)];
    };

    auto a = summary("patient-a");
    CHECK(a.answered_days == 46);
    CHECK(a.episode_days == 46);
    CHECK(a.any_symptom_days == 39);
    CHECK(symptom(a, Symptom::chest_tightness) == 9);
    CHECK(a.rescue_days == 24);
    CHECK(a.activity_limited_days == 26);
    CHECK(a.night_awakening_days == 7);
    CHECK(a.abnormal_lung_days == 2);
    CHECK(a.compliance.compliant_days == 7);
    CHECK(a.compliance.answered_days == 46);

    auto b = summary("patient-b");
    CHECK(b.answered_days == 50);
    CHECK(b.episode_days == 45);
    CHECK(symptom(b, Symptom::wheeze) == 27);
    CHECK(b.activity_limited_days == 15);
    CHECK(b.night_awakening_days == 1);
    CHECK(b.rescue_days == 24);
    CHECK(b.abnormal_lung_days == 6);
    CHECK(b.compliance.controller_compliance == 0.5);

    auto c = summary("patient-c");
    CHECK(c.answered_days == 33);
    CHECK(c.episode_days == 17);
    CHECK(c.any_symptom_days == 11);
    CHECK(symptom(c, Symptom::cough) == 11);
    CHECK(symptom(c, Symptom::wheeze) == 11);
    CHECK(c.activity_limited_days == 4);
    CHECK(c.rescue_days == 6);
    CHECK(c.abnormal_lung_days == 9);
    CHECK(c.compliance.compliant_days == 15);
    CHECK(c.compliance.answered_days == 24);
    auto first = snap.profile("patient-c").deployment_start;
    auto learn = compliance(snap, "patient-c", {first, add_days(first, 27)});
    auto predict = compliance(snap, "patient-c", {add_days(first, 28), add_days(first, 38)});
    CHECK(learn.controller_compliance == 7.0 / 16.0);
    CHECK(predict.controller_compliance == 1.0);

    auto d = summary("patient-d");
    CHECK(d.answered_days == 29);
    CHECK(d.episode_days == 6);
    CHECK(d.any_symptom_days == 5);
    CHECK(d.activity_limited_days == 1);
    CHECK(d.night_awakening_days == 1);
    CHECK(d.abnormal_lung_days == 0);
    CHECK(d.compliance.controller_compliance == doctest::Approx(0.7));
  }
}
