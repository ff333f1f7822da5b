#include <doctest.h>

#include "airway/alerting.hpp"
#include "airway/api.hpp"
#include "airway/error.hpp"
#include "support/gen.hpp"
#include "support/scenario.hpp"

using namespace airway;

namespace {

const Timestamp kNow = parse_timestamp("2018-06-01T00:00:00Z");

TokenRegistry tokens() {
  TokenRegistry reg;
  reg.add({"tok-b", "patient-b", parse_timestamp("2030-01-01T00:00:00Z")});
  return reg;
}

json body(const ApiResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_SUITE("api") {
  TEST_CASE("error codes map to HTTP statuses") {
    CHECK(http_status(ErrorCode::schema_violation) == 400);
    CHECK(http_status(ErrorCode::identity_leak) == 400);
    CHECK(http_status(ErrorCode::unauthorized) == 401);
    CHECK(http_status(ErrorCode::unknown_patient) == 404);
    CHECK(http_status(ErrorCode::batch_too_large) == 413);
    CHECK(http_status(ErrorCode::insufficient_episodes) == 422);
    CHECK(http_status(ErrorCode::empty_cohort) == 422);
    CHECK(http_status(ErrorCode::storage_unavailable) == 503);
    auto r = error_response(Error(ErrorCode::unknown_patient, "no such patient"));
    CHECK(r.status == 404);
    CHECK(body(r)["error"] == "UnknownPatient");
  }

  TEST_CASE("device uploads") {
    auto store = ObservationStore::in_memory();
    auto s = fixtures::patient_b();
    store.register_patient(s.profile);
    ApiService api(store, tokens(), {});

    std::string ndjson;
    for (auto& o : s.patient_stream()) {
      if (o.received_at < start_of(s.date(3))) ndjson += encode_line(o) + "\n";
    }
    auto ok = api.post_observations("Bearer tok-b", ndjson, kNow);
    CHECK(ok.status == 200);
    CHECK(body(ok)["accepted"].get<int>() > 0);
    auto dup = api.post_observations("Bearer tok-b", ndjson, kNow);
    CHECK(body(dup)["accepted"] == 0);
    CHECK(body(dup)["duplicates"] == body(ok)["accepted"]);

    auto partial = api.post_observations("Bearer tok-b", ndjson + "{bad\n", kNow);
    CHECK(partial.status == 207);
    CHECK(body(partial)["rejected"].size() == 1);
    CHECK(body(partial)["rejected"][0]["code"] == "SchemaViolation");

    CHECK(api.post_observations("tok-b", ndjson, kNow).status == 401);
    CHECK(api.post_observations("Bearer nope", ndjson, kNow).status == 401);
    CHECK(api.post_observations("Bearer tok-b", ndjson, parse_timestamp("2031-01-01T00:00:00Z"))
              .status == 401);

    gen::Gen g(1);
    std::string big;
    for (auto& o : gen::batch(g, "patient-b", "r", parse_date("2000-01-01"), 10'001)) {
      big += encode_line(o) + "\n";
    }
    CHECK(api.post_observations("Bearer tok-b", big, kNow).status == 413);
  }

  TEST_CASE("read endpoints") {
    auto store = fixtures::load_all({fixtures::patient_b(), fixtures::patient_d()});
    ApiService api(store, {}, {});

    auto patients = body(api.patients());
    REQUIRE(patients.size() == 2);
    CHECK(patients[0]["patient_id"] == "patient-b");
    CHECK(patients[0]["answer_rate"] == doctest::Approx(50.0 / 91.0));

    auto tl = api.timeline("patient-b", {{"from", "2017-12-04"}, {"to", "2017-12-10"}});
    CHECK(tl.status == 200);
    auto days = body(tl)["days"];
    REQUIRE(days.size() == 7);
    CHECK(days[0]["date"] == "2017-12-04");
    CHECK(days[0]["episode"] == false);
    CHECK(days[2]["answered"] == false);
    CHECK(days[2]["episode"].is_null());

    auto ep = body(api.episodes("patient-b", {}));
    CHECK(ep["days"].size() == 50);
    CHECK(ep["baselines"]["pef"]["n"].get<int>() > 2);

    auto tr = body(api.triggers("patient-b", {}));
    CHECK(tr["learning"]["major_triggers"] == json::array({"pm25"}));
    CHECK(tr["evaluation"]["hit_days"] == 19);
    auto summer = body(api.triggers("patient-d", {}));
    CHECK(summer["evaluation"].is_null());
    CHECK(summer["evaluation_error"]["error"] == "InsufficientEpisodes");

    auto sum = body(api.summary("patient-d", {}));
    CHECK(sum["answered_days"] == 29);
    CHECK(sum["episode_days"] == 6);
    CHECK(sum["season"]["season"] == "summer");
    CHECK(sum["symptoms"][0]["symptom"] == "chest_tightness");

    CHECK(api.timeline("ghost", {}).status == 404);
    CHECK(api.summary("ghost", {}).status == 404);
    CHECK(api.timeline("patient-b", {{"from", "yesterday"}}).status == 400);
    CHECK(api.cohort_triggers({}).status == 400);
    CHECK(api.cohort_triggers({{"season", "monsoon"}}).status == 400);
    CHECK(api.cohort_triggers({{"season", "fall"}}).status == 422);
  }

  TEST_CASE("cohort endpoint") {
    auto store = fixtures::load_all(fixtures::winter_cohort());
    ApiService api(store, {}, {});
    auto r = api.cohort_triggers({{"season", "winter"}});
    REQUIRE(r.status == 200);
    auto j = body(r);
    CHECK(j["patients_analyzed"] == 10);
    CHECK(j["members"].size() == 11);
  }

  TEST_CASE("repeated reads are byte-identical") {
    auto store = fixtures::load_all({fixtures::patient_c()});
    ApiService api(store, {}, {});
    auto s = fixtures::patient_c();
    for (int d = 14; d <= 20; ++d) run_alerts(store, "patient-c", s.date(d));
    for (int i = 0; i < 3; ++i) {
      CHECK(api.timeline("patient-c", {}).body == api.timeline("patient-c", {}).body);
      CHECK(api.triggers("patient-c", {{"learning_end", "2017-10-30"}}).body ==
            api.triggers("patient-c", {{"learning_end", "2017-10-30"}}).body);
      CHECK(api.summary("patient-c", {}).body == api.summary("patient-c", {}).body);
      CHECK(api.patients().body == api.patients().body);
      CHECK(api.alerts({}).body == api.alerts({}).body);
    }
  }

  TEST_CASE("config endpoint reports the shading thresholds") {
    auto store = ObservationStore::in_memory();
    ApiConfig cfg;
    cfg.params.ranges.set(Trigger::pm25, 0, 35);
    ApiService api(store, {}, cfg);
    auto j = body(api.config());
    CHECK(j["healthy_ranges"]["pollen"]["upper"] == 2.4);
    CHECK(j["healthy_ranges"]["pm25"]["upper"] == 35.0);
    CHECK(j["healthy_ranges"]["ozone"]["upper"] == 50.0);
    CHECK(j["seasons"]["summer"]["from"] == "06-01");
    CHECK(j["analysis"]["prolonged_window"] == 7);
  }
}
