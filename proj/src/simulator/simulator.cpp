#include "airway/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "airway/codec.hpp"
#include "airway/error.hpp"

namespace airway {

using namespace std::chrono_literals;
using std::chrono::hours;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::size_t idx(Trigger t) { return static_cast<std::size_t>(t); }

}  // namespace

// Unhealthy-day rates stay at or below 0.35. A trigger unhealthy on a fraction
// q of days lands in 1-(1-q)^2 of the two-day contributor windows, so higher
// rates let a common trigger outcount the one that causes the episodes.
EnvOptions default_env_options(Season season) {
  EnvOptions o;
  switch (season) {
    case Season::winter:
      o.unhealthy_prob = {0.0, 0.25, 0.05};
      o.pollen_present_prob = 0.0;
      o.temp_low = 5;
      o.temp_high = 50;
      break;
    case Season::spring:
      o.unhealthy_prob = {0.35, 0.15, 0.10};
      o.pollen_present_prob = 0.6;
      o.temp_low = 35;
      o.temp_high = 75;
      break;
    case Season::summer:
      o.unhealthy_prob = {0.20, 0.15, 0.30};
      o.pollen_present_prob = 0.5;
      o.temp_low = 60;
      o.temp_high = 92;
      break;
    case Season::fall:
      o.unhealthy_prob = {0.30, 0.15, 0.10};
      o.pollen_present_prob = 0.5;
      o.temp_low = 35;
      o.temp_high = 75;
      break;
  }
  return o;
}

Date default_season_start(Season season) {
  using namespace std::chrono;
  switch (season) {
    case Season::winter: return sys_days{2017y / December / 1};
    case Season::spring: return sys_days{2018y / March / 1};
    case Season::summer: return sys_days{2018y / June / 1};
    case Season::fall: return sys_days{2017y / September / 1};
  }
  return sys_days{2018y / January / 1};
}

const DailyEnvAggregate* EnvFixture::day(Date d) const {
  int i = days_between(first, d);
  if (i < 0 || i >= static_cast<int>(daily.size())) return nullptr;
  return &daily[static_cast<std::size_t>(i)];
}

EnvFixture gen_environment(Season season, const std::string& region, Date first, int days,
                           std::uint64_t seed, const EnvOptions& options) {
  if (days < 1) throw Error(ErrorCode::config_error, "environment needs at least one day");
  EnvFixture fx{region, first, days, {}, {}};
  Rng rng(derive_seed(seed, 1));
  auto& ranges = options.ranges;

  auto healthy = [&](Trigger t) {
    double u = ranges.of(t).upper;
    return round1(rng.uniform(0.1 * u, 0.9 * u));
  };
  auto spike = [&](Trigger t) {
    double u = ranges.of(t).upper;
    return round1(rng.uniform(1.1 * u, 3.0 * u));
  };

  for (int i = 0; i < days; ++i) {
    Date date = add_days(first, i);
    Timestamp start = options.clock.day_start(date);
    std::vector<EnvironmentSample> day_samples;
    auto emit = [&](int hour, EnvParameter p, double v) {
      day_samples.push_back({region, start + hours{hour}, p, v});
    };

    std::array<bool, kTriggerCount> bad{};
    for (auto t : kAllTriggers) bad[idx(t)] = rng.bernoulli(options.unhealthy_prob[idx(t)]);

    // Pollen at 00:00 and 12:00.
    bool winter = season == Season::winter;
    bool present = !winter && (bad[idx(Trigger::pollen)] || rng.bernoulli(options.pollen_present_prob));
    int spike_slot = rng.uniform_int(0, 1);
    for (int slot = 0; slot < 2; ++slot) {
      double v = 0;
      if (present) {
        v = bad[idx(Trigger::pollen)] && slot == spike_slot ? spike(Trigger::pollen)
                                                            : healthy(Trigger::pollen);
      }
      emit(slot * 12, EnvParameter::pollen, v);
    }

    int pm_peak = rng.uniform_int(0, 23);
    int oz_peak = rng.uniform_int(10, 18);
    double mean_temp = rng.uniform(options.temp_low, options.temp_high);
    for (int h = 0; h < 24; ++h) {
      double pm = bad[idx(Trigger::pm25)] && h == pm_peak ? spike(Trigger::pm25)
                                                          : healthy(Trigger::pm25);
      double oz = bad[idx(Trigger::ozone)] && h == oz_peak ? spike(Trigger::ozone)
                                                           : healthy(Trigger::ozone);
      double temp = round1(mean_temp + 8.0 * std::sin(2.0 * std::numbers::pi * (h - 9) / 24.0));
      double hum = round1(rng.uniform(20.0, 99.0));
      emit(h, EnvParameter::pm25, pm);
      emit(h, EnvParameter::ozone, oz);
      emit(h, EnvParameter::temperature, temp);
      emit(h, EnvParameter::humidity, hum);
    }
    std::stable_sort(day_samples.begin(), day_samples.end(),
                     [](auto& a, auto& b) { return a.timestamp < b.timestamp; });
    fx.daily.push_back(aggregate_samples(region, date, day_samples));
    fx.samples.insert(fx.samples.end(), day_samples.begin(), day_samples.end());
  }
  return fx;
}

EnvFixture gen_environment(Season season, const std::string& region, int days,
                           std::uint64_t seed) {
  return gen_environment(season, region, default_season_start(season), days, seed,
                         default_env_options(season));
}

// ---- patients ----

void GroundTruthPatient::validate() const {
  auto check = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::config_error, fmt::format("{} must lie in [0, 1]", what));
    }
  };
  for (double s : sensitivity) check(s, "sensitivity");
  check(lag_mix, "lag_mix");
  check(base_episode_rate, "base_episode_rate");
  check(answer_prob, "answer_prob");
  check(controller_prob, "controller_prob");
  if (personal_best_pef <= 0 || personal_best_fev1 <= 0) {
    throw Error(ErrorCode::config_error, "personal best must be positive");
  }
}

std::optional<Trigger> GroundTruthPatient::planted() const {
  std::optional<Trigger> best;
  for (auto t : kAllTriggers) {
    if (sensitivity[idx(t)] <= 0) continue;
    if (!best || sensitivity[idx(t)] > sensitivity[idx(*best)]) best = t;
  }
  return best;
}

int PatientStream::episode_days() const {
  return static_cast<int>(std::count_if(days.begin(), days.end(),
                                        [](auto& d) { return d.episode; }));
}

int PatientStream::answered_days() const {
  return static_cast<int>(std::count_if(days.begin(), days.end(),
                                        [](auto& d) { return d.answered; }));
}

namespace {

// Fixed categorical for the symptom an episode shows first.
Symptom draw_symptom(Rng& rng) {
  static constexpr std::array<std::pair<Symptom, double>, kSymptomCount> weights = {{
      {Symptom::cough, 0.30},
      {Symptom::wheeze, 0.25},
      {Symptom::chest_tightness, 0.20},
      {Symptom::hard_fast_breathing, 0.15},
      {Symptom::cant_talk_full_sentences, 0.05},
      {Symptom::nose_opens_wide, 0.05},
  }};
  double u = rng.uniform01();
  for (auto& [s, w] : weights) {
    if (u < w) return s;
    u -= w;
  }
  return Symptom::cough;
}

}  // namespace

PatientStream gen_patient_days(const GroundTruthPatient& gt, const EnvFixture& env,
                               const HealthyRanges& ranges) {
  gt.validate();
  PatientStream out;
  Rng rng(derive_seed(gt.seed, 2));
  auto& p = gt.profile;
  LocalClock clock;
  std::string rescue_med = p.rescue_meds.empty() ? "albuterol" : p.rescue_meds.front();

  auto unhealthy = [&](Date d, Trigger t) {
    auto* agg = env.day(d);
    if (!agg) return false;
    auto v = agg->max_of(parameter_of(t));
    return v && ranges.unhealthy(t, *v);
  };

  for (Date d = p.deployment_start; d <= p.deployment_end; d = add_days(d, 1)) {
    Timestamp start = clock.day_start(d);
    Date exposure = rng.bernoulli(gt.lag_mix) ? add_days(d, -1) : d;
    double prob = gt.base_episode_rate;
    for (auto t : kAllTriggers) {
      if (unhealthy(exposure, t)) prob += gt.sensitivity[idx(t)];
    }
    bool episode = rng.bernoulli(std::min(prob, 1.0));
    bool answered = rng.bernoulli(gt.answer_prob);
    out.days.push_back({d, episode, answered});

    // Lung readings are taken whether or not the questionnaire is.
    double factor = episode && rng.bernoulli(0.35) ? rng.uniform(0.60, 0.67) : 1.0;
    LungFunctionReading lung{p.patient_id, start + 8h,
                             factor == 1.0 ? gt.personal_best_pef
                                           : round1(gt.personal_best_pef * factor),
                             factor == 1.0 ? gt.personal_best_fev1
                                           : std::round(gt.personal_best_fev1 * factor * 100) / 100};
    out.observations.push_back(make_observation(lung, lung.timestamp));

    // Draws happen whether or not they are used, so one outcome never
    // shifts the stream of later ones.
    Symptom primary = draw_symptom(rng);
    SymptomSet extra;
    for (auto s : kAllSymptoms) {
      if (rng.bernoulli(0.15)) extra.insert(s);
    }
    bool rescue = rng.bernoulli(0.5);
    int rescue_count = rng.uniform_int(1, 4);
    bool controller = rng.bernoulli(gt.controller_prob);
    bool limited = rng.bernoulli(0.4);
    bool half_day = rng.bernoulli(0.3);
    bool awake = rng.bernoulli(0.3);

    if (!answered) continue;
    QuestionnaireResponse morning{p.patient_id, d, Slot::morning, {}, RescueCount{0, false},
                                  controller, std::nullopt, std::nullopt};
    QuestionnaireResponse daily{p.patient_id, d, Slot::daily, {}, std::nullopt, std::nullopt,
                                ActivityLimitation::none, false};
    if (episode) {
      morning.symptoms = SymptomSet{primary} | extra;
      if (rescue) morning.rescue = RescueCount{rescue_count, false};
      if (limited) {
        daily.activity_limitation =
            half_day ? ActivityLimitation::half_day : ActivityLimitation::a_little;
      }
      daily.night_awakening = awake;
    }
    out.observations.push_back(make_observation(morning, start + 9h));
    if (episode && rescue) {
      MedicationEvent ev{p.patient_id, start + 10h, rescue_med, MedicationCategory::rescue};
      out.observations.push_back(make_observation(ev, ev.timestamp));
    }
    out.observations.push_back(make_observation(daily, start + 21h));
  }
  std::stable_sort(out.observations.begin(), out.observations.end(),
                   [](auto& a, auto& b) { return a.received_at < b.received_at; });
  return out;
}

// ---- faults and device replay ----

FaultSchedule::FaultSchedule(std::vector<OfflineInterval> intervals)
    : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end(),
            [](auto& a, auto& b) { return a.from < b.from; });
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (!(intervals_[i].from < intervals_[i].to)) {
      throw Error(ErrorCode::config_error, "offline interval must end after it starts");
    }
    if (i > 0 && intervals_[i].from < intervals_[i - 1].to) {
      throw Error(ErrorCode::config_error, "offline intervals overlap");
    }
  }
}

bool FaultSchedule::offline(Timestamp t) const {
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](auto& iv) { return iv.from <= t && t < iv.to; });
}

Timestamp FaultSchedule::next_online(Timestamp t) const {
  for (auto& iv : intervals_) {
    if (iv.from <= t && t < iv.to) t = iv.to;
  }
  return t;
}

DeliveryLog replay_device(const std::vector<Observation>& stream, SyncGateway& gateway,
                          const std::string& token, const FaultSchedule& faults,
                          const ReplayOptions& options,
                          const std::function<void(const DeliveryAttempt&)>& on_attempt) {
  DeliveryLog log;
  if (stream.empty()) return log;
  std::vector<Observation> ordered = stream;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](auto& a, auto& b) { return a.received_at < b.received_at; });

  std::vector<const Observation*> buffer;
  std::vector<const Observation*> last_sent;
  bool was_offline = false;
  std::size_t next = 0;
  Timestamp t = ordered.front().received_at;
  auto step = std::max(options.sync_interval, std::chrono::seconds{1});
  std::size_t max_batch = std::max<std::size_t>(options.max_batch, 1);

  for (;;) {
    while (next < ordered.size() && ordered[next].received_at <= t) {
      buffer.push_back(&ordered[next++]);
    }
    if (!buffer.empty()) {
      DeliveryAttempt attempt{t, buffer.size(), false, {}};
      if (faults.offline(t)) {
        was_offline = true;
        ++log.failed_attempts;
      } else {
        std::vector<const Observation*> batch;
        std::size_t overlap = was_offline && options.resend_after_restore
                                  ? last_sent.size()
                                  : std::min(options.resend_overlap, last_sent.size());
        batch.insert(batch.end(), last_sent.end() - static_cast<std::ptrdiff_t>(overlap),
                     last_sent.end());
        batch.insert(batch.end(), buffer.begin(), buffer.end());
        attempt.items = batch.size();
        try {
          for (std::size_t i = 0; i < batch.size(); i += max_batch) {
            std::string body;
            for (std::size_t j = i; j < std::min(batch.size(), i + max_batch); ++j) {
              body += encode_line(*batch[j]);
              body += '\n';
            }
            auto r = gateway.ingest(token, body, t);
            attempt.receipt.accepted += r.accepted;
            attempt.receipt.duplicates += r.duplicates;
            attempt.receipt.conflicts += r.conflicts;
            for (auto& rej : r.rejected) {
              attempt.receipt.rejected.push_back({i + rej.index, rej.code, rej.reason});
            }
          }
          attempt.delivered = true;
          log.accepted += attempt.receipt.accepted;
          log.duplicates += attempt.receipt.duplicates;
          log.rejected += attempt.receipt.rejected.size();
          last_sent = buffer;
          buffer.clear();
          was_offline = false;
        } catch (const Error& e) {
          if (!e.retryable()) throw;
          // Chunks that made it are re-sent with the rest; the store
          // absorbs them as duplicates.
          log.accepted += attempt.receipt.accepted;
          log.duplicates += attempt.receipt.duplicates;
          was_offline = true;
          ++log.failed_attempts;
        }
      }
      log.attempts.push_back(attempt);
      if (on_attempt) on_attempt(log.attempts.back());
    }
    if (next >= ordered.size() && buffer.empty()) break;
    Timestamp following = t + step;
    if (next < ordered.size() && buffer.empty()) {
      following = std::max(following, ordered[next].received_at);
    } else if (next >= ordered.size()) {
      following = faults.next_online(following);
    }
    t = following;
  }
  return log;
}

// ---- cohorts ----

namespace {

Trigger draw_planted(Season season, Rng& rng) {
  std::array<double, kTriggerCount> w{};
  switch (season) {
    case Season::winter: w = {0.0, 0.8, 0.2}; break;
    case Season::spring: w = {0.6, 0.25, 0.15}; break;
    case Season::summer: w = {0.2, 0.3, 0.5}; break;
    case Season::fall: w = {0.5, 0.35, 0.15}; break;
  }
  double u = rng.uniform01();
  for (auto t : kAllTriggers) {
    if (u < w[idx(t)]) return t;
    u -= w[idx(t)];
  }
  return Trigger::ozone;
}

}  // namespace

SimulatedCohort simulate_cohort(const CohortSpec& spec) {
  if (spec.patients < 1) throw Error(ErrorCode::config_error, "cohort needs at least one patient");
  if (spec.min_days < 1 || spec.max_days < spec.min_days) {
    throw Error(ErrorCode::config_error, "bad deployment length bounds");
  }
  SimulatedCohort c;
  Date season_start = default_season_start(spec.season);
  int per_region = std::max(spec.patients_per_region, 1);
  int regions = (spec.patients + per_region - 1) / per_region;
  // Two weeks of lead-in so previous-day and prolonged-exposure lookups
  // have data.
  Date env_first = add_days(season_start, -14);
  int env_days = 14 + spec.max_days + 31;
  for (int r = 0; r < regions; ++r) {
    c.environments.push_back(gen_environment(
        spec.season, fmt::format("region-{}-{}", to_string(spec.season), r), env_first, env_days,
        derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(r)),
        default_env_options(spec.season)));
  }

  for (int i = 0; i < spec.patients; ++i) {
    Rng rng(derive_seed(spec.seed, 10'000 + static_cast<std::uint64_t>(i)));
    GroundTruthPatient gt;
    auto& p = gt.profile;
    p.patient_id = fmt::format("sim-{}-{:03}", to_string(spec.season), i);
    p.severity = rng.bernoulli(0.5) ? Severity::moderate : Severity::mild;
    p.rescue_meds = {"albuterol"};
    p.controller_meds = {"fluticasone"};
    p.region = c.environments[static_cast<std::size_t>(i / per_region)].region;
    int days = rng.uniform_int(spec.min_days, spec.max_days);
    int slack = std::max(0, 91 - days);
    p.deployment_start = add_days(season_start, rng.uniform_int(0, slack));
    p.deployment_end = add_days(p.deployment_start, days - 1);
    p.enrollment_months = days > 31 ? 3 : 1;

    Trigger planted = draw_planted(spec.season, rng);
    // Background sensitivities stay small: the same-or-previous-day rule
    // credits every trigger unhealthy in the window, so larger confounders
    // would outvote the planted one.
    for (auto t : kAllTriggers) gt.sensitivity[idx(t)] = rng.uniform(0.0, 0.05);
    gt.sensitivity[idx(planted)] = rng.uniform(0.7, 0.95);
    gt.lag_mix = rng.uniform(0.0, 0.4);
    gt.base_episode_rate = rng.uniform(0.01, 0.04);
    gt.answer_prob = rng.bernoulli(0.1) ? rng.uniform(0.05, 0.18) : rng.uniform(0.5, 0.95);
    gt.controller_prob = rng.uniform(0.2, 0.9);
    gt.personal_best_pef = std::round(rng.uniform(300, 500));
    gt.personal_best_fev1 = std::round(rng.uniform(2.0, 4.0) * 100) / 100;
    gt.seed = derive_seed(spec.seed, 20'000 + static_cast<std::uint64_t>(i));

    c.streams.push_back(gen_patient_days(gt, c.environments[static_cast<std::size_t>(i / per_region)]));
    c.truth.push_back(std::move(gt));
  }
  return c;
}

void SimulatedCohort::load_into(ObservationStore& store) const {
  for (auto& gt : truth) store.register_patient(gt.profile);
  for (auto& env : environments) {
    std::vector<Observation> batch;
    batch.reserve(env.samples.size());
    for (auto& s : env.samples) batch.push_back(make_observation(s, s.timestamp));
    for (std::size_t i = 0; i < batch.size(); i += kMaxBatchSize) {
      auto end = std::min(batch.size(), i + kMaxBatchSize);
      store.upsert_batch(std::span<const Observation>(batch.data() + i, end - i));
    }
  }
  for (auto& s : streams) store.upsert_batch(s.observations);
}

std::string SimulatedCohort::to_ndjson() const {
  auto store = ObservationStore::in_memory();
  load_into(store);
  return store.snapshot().export_ndjson();
}

}  // namespace airway
