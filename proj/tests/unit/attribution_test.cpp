#include <doctest.h>

#include "airway/attribution.hpp"
#include "airway/error.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/scenario.hpp"

using namespace airway;
using fixtures::Scenario;

namespace {

std::array<int, 3> unhealthy_row(const TriggerReport& r) {
  return {r.unhealthy(Trigger::pollen), r.unhealthy(Trigger::pm25), r.unhealthy(Trigger::ozone)};
}

std::array<int, 3> contributor_row(const TriggerReport& r) {
  return {r.contributors(Trigger::pollen), r.contributors(Trigger::pm25),
          r.contributors(Trigger::ozone)};
}

using Row = std::array<int, 3>;

void make_unhealthy(fixtures::EnvDay& env, int t) {
  if (t == 0) env.pollen = 5;
  if (t == 1) env.pm25 = 80;
  if (t == 2) env.ozone = 80;
}

AnalysisPeriod whole(const std::string& id, DateRange r) { return {id, PeriodLabel::learning, r}; }

}  // namespace

TEST_SUITE("attribution") {
  TEST_CASE("winter patient: unhealthy days and episodes per period") {
    auto s = fixtures::patient_b();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    AnalysisParams params;
    auto tl = load_timeline(snap, "patient-b", params);

    auto span = tl.analyzed_span();
    CHECK(span == DateRange{s.date(1), s.date(63)});
    auto split = split_periods("patient-b", span, std::nullopt, params.learning_fraction);
    CHECK(split.learning.range == DateRange{s.date(1), s.date(42)});
    CHECK(split.prediction.range == DateRange{s.date(43), s.date(63)});

    auto learning = period_report(tl, split.learning, params);
    CHECK(unhealthy_row(learning) == Row{0, 21, 0});
    CHECK(learning.episode_days == 24);
    CHECK(learning.answered_days == 29);
    CHECK(learning.temp_range == ValueRange{19, 60});
    CHECK(learning.humidity_range == ValueRange{17, 99});
    CHECK(learning.major_triggers == std::vector<Trigger>{Trigger::pm25});

    auto prediction = period_report(tl, split.prediction, params);
    CHECK(unhealthy_row(prediction) == Row{0, 19, 0});
    CHECK(prediction.episode_days == 21);
    CHECK(prediction.temp_range == ValueRange{-2, 58});
    CHECK(prediction.humidity_range == ValueRange{25, 99});
  }

  TEST_CASE("winter patient: prediction hits and prolonged exposure") {
    auto s = fixtures::patient_b();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    auto tl = load_timeline(snap, "patient-b", {});
    auto split = split_periods("patient-b", tl.analyzed_span(), s.date(43), 2.0 / 3.0);
    auto e = learn_and_predict(tl, split.learning, split.prediction, {});
    CHECK(e.learned == std::vector<Trigger>{Trigger::pm25});
    CHECK(e.episode_days == 21);
    CHECK(e.hit_days == 19);
    CHECK(e.false_alarm_days == 0);
    REQUIRE(e.unexplained.size() == 2);
    CHECK(e.unexplained[0].date == s.date(43));
    CHECK(e.unexplained[1].date == s.date(44));
    for (auto& u : e.unexplained) CHECK(u.prolonged == std::vector<Trigger>{Trigger::pm25});

    // Six of seven: only the first unexplained day still qualifies.
    AnalysisParams strict;
    strict.prolonged_min = 6;
    CHECK(prolonged_exposure(tl, s.date(43), Trigger::pm25, strict));
    CHECK_FALSE(prolonged_exposure(tl, s.date(44), Trigger::pm25, strict));
  }

  TEST_CASE("two-season patient: pollen segments and per-period counts") {
    auto s = fixtures::patient_a();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    AnalysisParams params;
    auto segments = segment_by_pollen(snap, "patient-a", params);
    REQUIRE(segments.size() == 2);
    CHECK(segments[0] == PollenSegment{PollenState::absent, {s.date(1), s.date(42)}});
    CHECK(segments[1] == PollenSegment{PollenState::present, {s.date(43), s.date(91)}});

    auto tl = load_timeline(snap, "patient-a", params);
    std::vector<Row> unhealthy;
    std::vector<int> episodes;
    for (auto& seg : segments) {
      auto split = split_periods("patient-a", seg.range, add_days(seg.range.first, 28), 0.5);
      for (auto* p : {&split.learning, &split.prediction}) {
        auto r = period_report(tl, *p, params);
        unhealthy.push_back(unhealthy_row(r));
        episodes.push_back(r.episode_days);
      }
    }
    CHECK(unhealthy == std::vector<Row>{{0, 20, 1}, {0, 5, 0}, {17, 14, 0}, {3, 2, 1}});
    CHECK(episodes == std::vector<int>{21, 5, 17, 3});
    CHECK(snap.answer_rate("patient-a") == doctest::Approx(46.0 / 91.0));
  }

  TEST_CASE("fall patient: unhealthy rows exceed episodes in prediction") {
    auto s = fixtures::patient_c();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    AnalysisParams params;
    auto tl = load_timeline(snap, "patient-c", params);
    auto split = split_periods("patient-c", tl.analyzed_span(), s.date(29), 0.5);
    auto learning = period_report(tl, split.learning, params);
    auto prediction = period_report(tl, split.prediction, params);

    CHECK(unhealthy_row(learning) == Row{11, 8, 2});
    CHECK(learning.episode_days == 12);
    CHECK(contributor_row(learning) == Row{11, 7, 2});
    CHECK(learning.major_triggers ==
          std::vector<Trigger>{Trigger::pollen, Trigger::pm25, Trigger::ozone});
    CHECK(learning.temp_range == ValueRange{65, 85});
    CHECK(learning.humidity_range == ValueRange{70, 90});

    CHECK(unhealthy_row(prediction) == Row{10, 10, 6});
    CHECK(prediction.episode_days == 5);
    CHECK(prediction.unhealthy(Trigger::pollen) > prediction.episode_days);
    CHECK(prediction.temp_range == ValueRange{55, 80});
    CHECK(prediction.humidity_range == ValueRange{50, 98});
  }

  TEST_CASE("summer patient: too few episodes to learn") {
    auto s = fixtures::patient_d();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    auto tl = load_timeline(snap, "patient-d", {});
    auto span = tl.analyzed_span();
    auto split = split_periods("patient-d", span, std::nullopt, 2.0 / 3.0);
    try {
      learn_and_predict(tl, split.learning, split.prediction, {});
      FAIL("expected insufficient_episodes");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::insufficient_episodes);
    }
    auto r = period_report(tl, whole("patient-d", span), {});
    CHECK(r.episode_days == 6);
    CHECK(contributor_row(r) == Row{3, 6, 4});
    CHECK(r.major_triggers ==
          std::vector<Trigger>{Trigger::pm25, Trigger::ozone, Trigger::pollen});
  }

  TEST_CASE("split boundaries") {
    DateRange span{parse_date("2018-01-01"), parse_date("2018-03-04")};  // 63 days
    auto d = split_periods("p", span, std::nullopt, 2.0 / 3.0);
    CHECK(d.learning.range.days() == 42);
    CHECK(d.prediction.range.days() == 21);
    CHECK(split_periods("p", {span.first, add_days(span.first, 48)}, std::nullopt, 2.0 / 3.0)
              .learning.range.days() == 33);

    auto code_of = [&](std::optional<Date> boundary, DateRange r) {
      try {
        split_periods("p", r, boundary, 2.0 / 3.0);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::config_error;
    };
    CHECK(code_of(span.first, span) == ErrorCode::insufficient_data);
    CHECK(code_of(add_days(span.last, 1), span) == ErrorCode::insufficient_data);
    CHECK(code_of(std::nullopt, {span.first, add_days(span.first, -1)}) ==
          ErrorCode::insufficient_data);
    CHECK(code_of(std::nullopt, {span.first, span.first}) == ErrorCode::insufficient_data);
  }

  TEST_CASE("empty period is an error") {
    auto s = fixtures::patient_b();
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    AnalysisPeriod empty{"patient-b", PeriodLabel::learning, {s.date(5), s.date(4)}};
    CHECK_THROWS_AS(period_report(snap, empty), Error);
  }

  TEST_CASE("ranking is total with pollen > pm25 > ozone on ties") {
    CHECK(rank_triggers({0, 0, 0}).empty());
    CHECK(rank_triggers({2, 2, 2}) ==
          std::vector<Trigger>{Trigger::pollen, Trigger::pm25, Trigger::ozone});
    CHECK(rank_triggers({1, 3, 3}) ==
          std::vector<Trigger>{Trigger::pm25, Trigger::ozone, Trigger::pollen});
    CHECK(rank_triggers({0, 1, 5}) == std::vector<Trigger>{Trigger::ozone, Trigger::pm25});

    gen::Gen g(17);
    for (int i = 0; i < 2000; ++i) {
      std::array<int, 3> counts{g.range(0, 4), g.range(0, 4), g.range(0, 4)};
      auto ranked = rank_triggers(counts);
      auto expect = oracles::ranking(counts);
      REQUIRE(ranked.size() == expect.size());
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        CHECK(static_cast<int>(ranked[k]) == expect[k]);
      }
    }
  }

  TEST_CASE("period counts match a brute-force enumerator on random traces") {
    gen::Gen g(2024);
    Date start = parse_date("2018-04-02");
    for (int trial = 0; trial < 150; ++trial) {
      // Day 1 of the deployment stands in front of a 14-day period.
      auto s = fixtures::make_scenario("trace", "region-t", start, 15);
      std::vector<oracles::TraceDay> trace(15);
      for (int d = 1; d <= 15; ++d) {
        auto& td = trace[static_cast<std::size_t>(d - 1)];
        auto& day = s.day(d);
        day.env.pollen = 1;
        for (int t = 0; t < 3; ++t) {
          td.unhealthy[static_cast<std::size_t>(t)] = g.coin(0.35);
          if (td.unhealthy[static_cast<std::size_t>(t)]) make_unhealthy(day.env, t);
        }
        td.answered = g.coin(0.75);
        td.episode = td.answered && g.coin(0.5);
        day.answered = td.answered;
        if (td.episode) day.symptoms = {Symptom::cough};
      }
      auto store = fixtures::load_all({s});
      auto snap = store.snapshot();
      AnalysisParams params;
      AnalysisPeriod period{"trace", PeriodLabel::learning, {s.date(2), s.date(15)}};
      auto r = period_report(snap, period, params);
      auto expect = oracles::period_counts(trace);

      CHECK(r.answered_days == expect.answered);
      CHECK(r.episode_days == expect.episodes);
      CHECK(unhealthy_row(r) == expect.unhealthy);
      CHECK(contributor_row(r) == expect.contributors);
      CHECK(r.explained_days == expect.explained);
      auto ranked = oracles::ranking(expect.contributors);
      REQUIRE(r.major_triggers.size() == ranked.size());
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        CHECK(static_cast<int>(r.major_triggers[k]) == ranked[k]);
      }

      // Bounds from the report's own invariants.
      CHECK(r.explained_days <= r.episode_days);
      for (int t = 0; t < 3; ++t) {
        int carried = 0;
        for (std::size_t i = 1; i < trace.size(); ++i) {
          if (trace[i].episode && !trace[i].unhealthy[t] && trace[i - 1].unhealthy[t]) ++carried;
        }
        CHECK(r.contributor_days[t] <= r.episode_days);
        CHECK(r.contributor_days[t] <= r.unhealthy_days[t] + carried);
        CHECK(r.unhealthy_days[t] <= period.range.days());
      }

      // Same snapshot, same report.
      auto again = period_report(snap, period, params);
      CHECK(to_json(again) == to_json(r));
    }
  }

  TEST_CASE("previous-day credit: one day back keeps the count, two days back drops it") {
    gen::Gen g(7);
    Date start = parse_date("2018-05-07");
    for (int trial = 0; trial < 30; ++trial) {
      int t = g.range(0, 2);
      int episode_day = g.range(4, 12);
      auto count_with_unhealthy_on = [&](int unhealthy_day) {
        auto s = fixtures::make_scenario("shift", "region-s", start, 14);
        for (int d = 1; d <= 14; ++d) s.day(d).answered = true;
        s.day(episode_day).symptoms = {Symptom::wheeze};
        make_unhealthy(s.day(unhealthy_day).env, t);
        auto store = fixtures::load_all({s});
        auto snap = store.snapshot();
        auto r = period_report(snap, whole("shift", {s.date(1), s.date(14)}));
        return r.contributor_days[static_cast<std::size_t>(t)];
      };
      int same_day = count_with_unhealthy_on(episode_day);
      CHECK(same_day == 1);
      CHECK(count_with_unhealthy_on(episode_day - 1) == same_day);
      CHECK(count_with_unhealthy_on(episode_day - 2) == same_day - 1);
    }
  }

  TEST_CASE("previous-day credit reaches across the period boundary") {
    auto s = fixtures::make_scenario("edge", "region-e", parse_date("2018-05-07"), 10);
    for (int d = 1; d <= 10; ++d) s.day(d).answered = true;
    s.day(6).symptoms = {Symptom::cough};
    s.day(5).env.ozone = 90;
    auto store = fixtures::load_all({s});
    auto snap = store.snapshot();
    auto r = period_report(snap, whole("edge", {s.date(6), s.date(10)}));
    CHECK(r.contributors(Trigger::ozone) == 1);
    CHECK(r.unhealthy(Trigger::ozone) == 0);
  }

  TEST_CASE("prolonged exposure: every 7-day window pattern") {
    for (std::uint32_t mask = 0; mask < 128; ++mask) {
      std::array<bool, 7> window{};
      for (int i = 0; i < 7; ++i) window[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      for (int m = 1; m <= 7; ++m) {
        CHECK(prolonged_exposure(window, m) == oracles::prolonged(mask, m));
      }
    }
  }

  TEST_CASE("prolonged exposure against stored data looks strictly before the date") {
    Date start = parse_date("2017-12-04");
    gen::Gen g(99);
    for (int trial = 0; trial < 24; ++trial) {
      auto mask = static_cast<std::uint32_t>(g.range(0, 127));
      auto s = fixtures::make_scenario("window", "region-w", start, 9);
      s.day(9).answered = true;
      s.day(9).env.pm25 = 150;  // the date itself never counts
      for (int i = 0; i < 7; ++i) {
        if ((mask >> i) & 1u) s.day(8 - i).env.pm25 = 150;
      }
      auto store = fixtures::load_all({s});
      auto snap = store.snapshot();
      CHECK(prolonged_exposure(snap, "window", s.date(9), Trigger::pm25) ==
            oracles::prolonged(mask, 5));
    }
  }

  TEST_CASE("pollen segmentation smooths short runs") {
    Date first = parse_date("2018-03-01");
    auto seg = [&](std::vector<int> bits, int smoothing) {
      auto present = std::make_unique<bool[]>(bits.size());
      for (std::size_t i = 0; i < bits.size(); ++i) present[i] = bits[i] != 0;
      return segment_by_pollen(std::span<const bool>(present.get(), bits.size()), first,
                               smoothing);
    };
    auto one = seg({1, 1, 1, 0, 1, 1, 1}, 3);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == PollenSegment{PollenState::present, {first, add_days(first, 6)}});

    auto leading = seg({1, 0, 0, 0, 0}, 3);
    REQUIRE(leading.size() == 1);
    CHECK(leading[0].state == PollenState::absent);
    CHECK(leading[0].range.first == first);

    auto two = seg({0, 0, 0, 1, 1, 1, 1}, 3);
    REQUIRE(two.size() == 2);
    CHECK(two[0].range.days() == 3);
    CHECK(two[1].range.days() == 4);

    CHECK(seg({}, 3).empty());
    CHECK(seg({0, 1, 0, 1}, 1).size() == 4);

    // Segments always tile the input.
    gen::Gen g(5);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<int> bits(static_cast<std::size_t>(g.range(1, 40)));
      for (auto& b : bits) b = g.coin(0.5);
      auto out = seg(bits, g.range(1, 5));
      REQUIRE_FALSE(out.empty());
      CHECK(out.front().range.first == first);
      CHECK(out.back().range.last == add_days(first, static_cast<int>(bits.size()) - 1));
      for (std::size_t i = 1; i < out.size(); ++i) {
        CHECK(out[i].range.first == add_days(out[i - 1].range.last, 1));
        CHECK(out[i].state != out[i - 1].state);
      }
    }
  }

  TEST_CASE("season assignment by majority") {
    SeasonConfig seasons;
    auto a = assign_season({parse_date("2017-12-10"), parse_date("2018-01-08")}, seasons);
    CHECK(a.season == Season::winter);
    CHECK_FALSE(a.spanning);

    auto b = assign_season({parse_date("2018-02-15"), parse_date("2018-03-20")}, seasons);
    CHECK(b.season == Season::spring);
    CHECK(b.spanning);

    auto tie = assign_season({parse_date("2018-02-20"), parse_date("2018-03-09")}, seasons);
    CHECK(tie.season == Season::winter);
    CHECK(tie.spanning);

    auto c = assign_season({parse_date("2017-11-25"), parse_date("2017-12-31")}, seasons);
    CHECK(c.season == Season::winter);
    CHECK_FALSE(c.spanning);

    // A 13-week deployment from early January.
    auto d = assign_season({parse_date("2018-01-08"), parse_date("2018-04-08")}, seasons);
    CHECK(d.season == Season::winter);
    CHECK(d.days[0] == 52);
    CHECK(d.days[1] == 39);
    CHECK(d.spanning);
  }

  TEST_CASE("cohort distributions") {
    auto winter = fixtures::load_all(fixtures::winter_cohort());
    auto ws = cohort_summary(winter.snapshot(), Season::winter);
    CHECK(ws.patients_analyzed == 10);
    CHECK(ws.fraction(Trigger::pm25) == doctest::Approx(0.8));
    CHECK(ws.fraction(Trigger::ozone) == doctest::Approx(0.2));
    CHECK(ws.no_episode_patients == 0);

    auto spring = fixtures::load_all(fixtures::spring_cohort());
    auto snap = spring.snapshot();
    auto ss = cohort_summary(snap, Season::spring);
    CHECK(ss.patients_analyzed == 16);
    CHECK(ss.fraction(Trigger::pollen) == 0.625);
    CHECK(ss.fraction(Trigger::pm25) == 0.1875);
    CHECK(ss.fraction(Trigger::ozone) == 0.0625);
    CHECK(ss.no_episode_patients == 2);
    CHECK(ss.no_episode_fraction == 0.125);

    // Fractions sum to at most one and agree with per-patient recomputation.
    std::array<int, 3> tops{};
    int n = 0;
    for (auto& p : snap.patients()) {
      auto m = cohort_member(snap, p.patient_id);
      if (!m.eligibility.included || m.season.season != Season::spring) continue;
      ++n;
      if (auto top = m.top_trigger()) ++tops[static_cast<std::size_t>(*top)];
    }
    double sum = 0;
    for (auto t : kAllTriggers) {
      double f = static_cast<double>(tops[static_cast<std::size_t>(t)]) / n;
      CHECK(ss.fraction(t) == f);
      sum += ss.fraction(t);
    }
    CHECK(sum <= 1.0);

    CHECK_THROWS_AS(cohort_summary(snap, Season::summer), Error);
  }

  TEST_CASE("ineligible patients stay out of the cohort") {
    auto store = fixtures::load_all(fixtures::winter_cohort());
    auto snap = store.snapshot();
    auto m = cohort_member(snap, "w-sparse");
    CHECK_FALSE(m.eligibility.included);
    CHECK(m.eligibility.answer_rate == doctest::Approx(0.1));
  }

  TEST_CASE("parameter validation") {
    AnalysisParams p;
    CHECK_NOTHROW(p.validate());
    p.prolonged_min = 8;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.learning_fraction = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.smoothing_days = 0;
    CHECK_THROWS_AS(p.validate(), Error);
  }
}
