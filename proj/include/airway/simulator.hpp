#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "airway/gateway.hpp"
#include "airway/model.hpp"
#include "airway/ranges.hpp"
#include "airway/season.hpp"
#include "airway/store.hpp"

namespace airway {

/// mt19937_64 with hand-rolled draws; the std distributions differ between
/// standard libraries, these don't.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform01() * static_cast<double>(hi - lo + 1));
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Independent stream for a (seed, tag) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

struct EnvOptions {
  /// Probability that a day is unhealthy for each trigger.
  std::array<double, kTriggerCount> unhealthy_prob{};
  /// Probability that pollen is present at all on a day (healthy or not).
  double pollen_present_prob = 0;
  double temp_low = 20;   // degrees F
  double temp_high = 60;
  LocalClock clock;
  HealthyRanges ranges;
};

EnvOptions default_env_options(Season season);

/// Start date used when a season is simulated without an explicit date.
Date default_season_start(Season season);

struct EnvFixture {
  std::string region;
  Date first;
  int days = 0;
  std::vector<EnvironmentSample> samples;  // timestamp order
  std::vector<DailyEnvAggregate> daily;    // one per day

  const DailyEnvAggregate* day(Date d) const;
};

/// Hourly pm25/ozone/temperature/humidity and 12-hourly pollen (00:00 and
/// 12:00 local). Winter pollen is always 0.
EnvFixture gen_environment(Season season, const std::string& region, Date first, int days,
                           std::uint64_t seed, const EnvOptions& options);
EnvFixture gen_environment(Season season, const std::string& region, int days,
                           std::uint64_t seed);

struct GroundTruthPatient {
  PatientProfile profile;
  std::array<double, kTriggerCount> sensitivity{};
  double lag_mix = 0;  // chance of reacting to the previous day's exposure
  double base_episode_rate = 0;
  double answer_prob = 1;
  double controller_prob = 1;
  double personal_best_pef = 400;
  double personal_best_fev1 = 3.0;
  std::uint64_t seed = 0;

  /// Throws Error{config_error} for probabilities outside [0, 1].
  void validate() const;
  /// Trigger with the largest sensitivity (ties in enum order); none if all 0.
  std::optional<Trigger> planted() const;
};

struct GeneratedDay {
  Date date;
  bool episode = false;
  bool answered = false;
};

struct PatientStream {
  std::vector<Observation> observations;  // received_at order
  std::vector<GeneratedDay> days;

  int episode_days() const;
  int answered_days() const;
};

/// Questionnaire, lung and medication observations for the deployment.
/// received_at is stamped as the device would when the data was produced.
PatientStream gen_patient_days(const GroundTruthPatient& gt, const EnvFixture& env,
                               const HealthyRanges& ranges = {});

struct OfflineInterval {
  Timestamp from;  // inclusive
  Timestamp to;    // exclusive
};

class FaultSchedule {
 public:
  FaultSchedule() = default;
  /// Throws Error{config_error} when intervals overlap or are inverted.
  explicit FaultSchedule(std::vector<OfflineInterval> intervals);

  bool offline(Timestamp t) const;
  /// First instant at or after `t` where the device is online.
  Timestamp next_online(Timestamp t) const;
  const std::vector<OfflineInterval>& intervals() const { return intervals_; }

 private:
  std::vector<OfflineInterval> intervals_;  // sorted
};

struct ReplayOptions {
  std::chrono::seconds sync_interval{std::chrono::hours{1}};
  std::size_t max_batch = 500;
  /// Items of the last successful sync re-sent with the next one, as a
  /// client that missed an acknowledgement would.
  std::size_t resend_overlap = 0;
  /// The device re-sends everything it buffered while offline and the
  /// previous successful batch after a restore.
  bool resend_after_restore = true;
};

struct DeliveryAttempt {
  Timestamp at;
  std::size_t items = 0;
  bool delivered = false;
  IngestReceipt receipt;
};

struct DeliveryLog {
  std::vector<DeliveryAttempt> attempts;
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t rejected = 0;
  std::size_t failed_attempts = 0;
};

/// Plays `stream` through the gateway as a device with `token` would,
/// buffering while offline. `on_attempt` sees every attempt right after it
/// happened.
DeliveryLog replay_device(const std::vector<Observation>& stream, SyncGateway& gateway,
                          const std::string& token, const FaultSchedule& faults,
                          const ReplayOptions& options = {},
                          const std::function<void(const DeliveryAttempt&)>& on_attempt = {});

struct CohortSpec {
  Season season = Season::winter;
  int patients = 10;
  std::uint64_t seed = 1;
  int patients_per_region = 5;
  int min_days = 42;
  int max_days = 91;
};

struct SimulatedCohort {
  std::vector<GroundTruthPatient> truth;
  std::vector<EnvFixture> environments;
  std::vector<PatientStream> streams;

  /// Profiles first, then every observation in canonical key order.
  std::string to_ndjson() const;
  /// Registers profiles and upserts everything directly.
  void load_into(ObservationStore& store) const;
};

SimulatedCohort simulate_cohort(const CohortSpec& spec);

}  // namespace airway
