#include "airway/store.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "airway/error.hpp"
#include "airway/validation.hpp"

namespace airway {

std::string_view to_string(UpsertOutcome outcome) {
  switch (outcome) {
    case UpsertOutcome::stored: return "stored";
    case UpsertOutcome::duplicate: return "duplicate";
    case UpsertOutcome::conflict_applied: return "conflict_applied";
    case UpsertOutcome::conflict_ignored: return "conflict_ignored";
  }
  return "?";
}

namespace {

class NullBackend final : public StorageBackend {
 public:
  LoadedRows load() override { return {}; }
  void commit(const CommitSet&) override {}
};

json conflict_to_json(const ConflictEvent& c) {
  return {{"key", c.key.str()},
          {"kept_received_at", format_timestamp(c.kept_received_at)},
          {"dropped_received_at", format_timestamp(c.dropped_received_at)}};
}

void fold_min(std::optional<double>& slot, double v) { slot = slot ? std::min(*slot, v) : v; }
void fold_max(std::optional<double>& slot, double v) { slot = slot ? std::max(*slot, v) : v; }

}  // namespace

std::optional<double> DailyEnvAggregate::max_of(EnvParameter p) const {
  switch (p) {
    case EnvParameter::pollen: return pollen_max;
    case EnvParameter::pm25: return pm25_max;
    case EnvParameter::ozone: return ozone_max;
    case EnvParameter::temperature: return temp_max;
    case EnvParameter::humidity: return humidity_max;
  }
  return std::nullopt;
}

DailyEnvAggregate aggregate_samples(const std::string& region, Date date,
                                    std::span<const EnvironmentSample> samples) {
  DailyEnvAggregate agg;
  agg.region = region;
  agg.date = date;
  for (auto& s : samples) {
    ++agg.samples_present[static_cast<std::size_t>(s.parameter)];
    switch (s.parameter) {
      case EnvParameter::pollen: fold_max(agg.pollen_max, s.value); break;
      case EnvParameter::pm25: fold_max(agg.pm25_max, s.value); break;
      case EnvParameter::ozone: fold_max(agg.ozone_max, s.value); break;
      case EnvParameter::temperature:
        fold_min(agg.temp_min, s.value);
        fold_max(agg.temp_max, s.value);
        break;
      case EnvParameter::humidity:
        fold_min(agg.humidity_min, s.value);
        fold_max(agg.humidity_max, s.value);
        break;
    }
  }
  return agg;
}

struct StoreSnapshot::State {
  LocalClock clock;
  std::map<IdempotencyKey, Observation> observations;
  std::map<std::string, PatientProfile> patients;
  std::map<std::string, Alert> alerts;
  std::vector<ConflictEvent> conflicts;
};

struct ObservationStore::Impl {
  std::unique_ptr<StorageBackend> backend;
  std::mutex writer;
  mutable std::shared_mutex visibility;
  StoreSnapshot::State state;

  void load();
};

namespace {

/// Decides the outcome of writing `incoming` over `existing`.
UpsertOutcome resolve(const Observation& existing, const Observation& incoming) {
  if (existing.payload == incoming.payload && existing.stream == incoming.stream) {
    return UpsertOutcome::duplicate;
  }
  if (incoming.received_at != existing.received_at) {
    return incoming.received_at > existing.received_at ? UpsertOutcome::conflict_applied
                                                       : UpsertOutcome::conflict_ignored;
  }
  // Same received_at: fall back to the canonical encoding so the winner does
  // not depend on arrival order.
  return encode_line(incoming) > encode_line(existing) ? UpsertOutcome::conflict_applied
                                                       : UpsertOutcome::conflict_ignored;
}

}  // namespace

void ObservationStore::Impl::load() {
  LoadedRows rows = backend->load();
  auto corrupt = [](const std::string& what) { throw Error(ErrorCode::store_corruption, what); };
  for (auto& line : rows.patients) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) corrupt("unreadable patient row");
    try {
      auto p = profile_from_json(j);
      state.patients[p.patient_id] = std::move(p);
    } catch (const Error& e) {
      corrupt(fmt::format("invalid patient row: {}", e.what()));
    }
  }
  for (auto& line : rows.observations) {
    auto result = validate_line(line, Timestamp{});
    if (!accepted(result)) {
      corrupt(fmt::format("invalid observation row: {}", std::get<Rejection>(result).reason));
    }
    auto& obs = std::get<Observation>(result);
    state.observations.emplace(obs.key(), std::move(obs));
  }
  for (auto& line : rows.alerts) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) corrupt("unreadable alert row");
    try {
      auto a = alert_from_json(j);
      state.alerts[a.key()] = std::move(a);
    } catch (const Error& e) {
      corrupt(fmt::format("invalid alert row: {}", e.what()));
    }
  }
  for (auto& line : rows.conflicts) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) corrupt("unreadable conflict row");
    // Only the timestamps are kept; the key string is informational.
    ConflictEvent c;
    c.key.subject = j.value("key", "");
    c.kept_received_at = parse_timestamp(j.value("kept_received_at", "1970-01-01T00:00:00Z"));
    c.dropped_received_at =
        parse_timestamp(j.value("dropped_received_at", "1970-01-01T00:00:00Z"));
    state.conflicts.push_back(std::move(c));
  }
}

ObservationStore ObservationStore::in_memory(StoreOptions options) {
  return ObservationStore(std::make_unique<NullBackend>(), options);
}

ObservationStore ObservationStore::open(const std::filesystem::path& path, StoreOptions options) {
  return ObservationStore(make_sqlite_backend(path), options);
}

ObservationStore::ObservationStore(std::unique_ptr<StorageBackend> backend, StoreOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->backend = std::move(backend);
  impl_->state.clock = options.clock;
  impl_->load();
}

ObservationStore::ObservationStore(ObservationStore&&) noexcept = default;
ObservationStore& ObservationStore::operator=(ObservationStore&&) noexcept = default;
ObservationStore::~ObservationStore() = default;

UpsertOutcome ObservationStore::upsert(const Observation& obs) {
  return upsert_batch(std::span<const Observation>(&obs, 1)).front();
}

std::vector<UpsertOutcome> ObservationStore::upsert_batch(std::span<const Observation> batch) {
  std::lock_guard writer{impl_->writer};
  auto& state = impl_->state;

  // Stage against a private overlay so later items in the batch see earlier
  // ones, without touching the visible state until the commit succeeds.
  std::map<IdempotencyKey, Observation> staged;
  std::vector<ConflictEvent> new_conflicts;
  std::vector<UpsertOutcome> outcomes;
  outcomes.reserve(batch.size());

  for (auto& obs : batch) {
    auto key = obs.key();
    const Observation* existing = nullptr;
    if (auto it = staged.find(key); it != staged.end()) {
      existing = &it->second;
    } else if (auto jt = state.observations.find(key); jt != state.observations.end()) {
      existing = &jt->second;
    }
    if (!existing) {
      staged.insert_or_assign(key, obs);
      outcomes.push_back(UpsertOutcome::stored);
      continue;
    }
    auto outcome = resolve(*existing, obs);
    outcomes.push_back(outcome);
    if (outcome == UpsertOutcome::duplicate) continue;
    ConflictEvent event{key, {}, {}};
    if (outcome == UpsertOutcome::conflict_applied) {
      event.kept_received_at = obs.received_at;
      event.dropped_received_at = existing->received_at;
      staged.insert_or_assign(key, obs);
    } else {
      event.kept_received_at = existing->received_at;
      event.dropped_received_at = obs.received_at;
    }
    spdlog::warn("conflicting payload for {}; kept write received at {}", key.str(),
                 format_timestamp(event.kept_received_at));
    new_conflicts.push_back(std::move(event));
  }

  CommitSet rows;
  for (auto& [key, obs] : staged) rows.observations.emplace_back(key.str(), encode_line(obs));
  for (auto& c : new_conflicts) rows.conflicts.push_back(conflict_to_json(c).dump());
  if (!rows.empty()) impl_->backend->commit(rows);

  std::unique_lock visible{impl_->visibility};
  for (auto& [key, obs] : staged) state.observations.insert_or_assign(key, std::move(obs));
  for (auto& c : new_conflicts) state.conflicts.push_back(std::move(c));
  return outcomes;
}

void ObservationStore::register_patient(const PatientProfile& profile) {
  check_profile(profile);
  std::lock_guard writer{impl_->writer};
  CommitSet rows;
  rows.patients.emplace_back(profile.patient_id, profile_to_json(profile).dump());
  impl_->backend->commit(rows);
  std::unique_lock visible{impl_->visibility};
  impl_->state.patients[profile.patient_id] = profile;
}

std::size_t ObservationStore::put_alerts(std::span<const Alert> alerts) {
  std::lock_guard writer{impl_->writer};
  std::map<std::string, Alert> fresh;
  for (auto& a : alerts) {
    auto key = a.key();
    if (!impl_->state.alerts.count(key)) fresh.emplace(std::move(key), a);
  }
  if (fresh.empty()) return 0;
  CommitSet rows;
  for (auto& [key, a] : fresh) rows.alerts.emplace_back(key, alert_to_json(a).dump());
  impl_->backend->commit(rows);
  std::unique_lock visible{impl_->visibility};
  for (auto& [key, a] : fresh) impl_->state.alerts.emplace(key, std::move(a));
  return fresh.size();
}

StoreSnapshot ObservationStore::snapshot() const {
  return StoreSnapshot(std::shared_lock{impl_->visibility}, impl_->state);
}

// --- snapshot ---------------------------------------------------------------

StoreSnapshot::StoreSnapshot(std::shared_lock<std::shared_mutex> lock, const State& state)
    : lock_(std::move(lock)), state_(&state) {}

const LocalClock& StoreSnapshot::clock() const { return state_->clock; }

const PatientProfile* StoreSnapshot::find_profile(const std::string& patient_id) const {
  auto it = state_->patients.find(patient_id);
  return it == state_->patients.end() ? nullptr : &it->second;
}

const PatientProfile& StoreSnapshot::profile(const std::string& patient_id) const {
  auto* p = find_profile(patient_id);
  if (!p) throw Error(ErrorCode::unknown_patient, fmt::format("unknown patient '{}'", patient_id));
  return *p;
}

std::vector<PatientProfile> StoreSnapshot::patients() const {
  std::vector<PatientProfile> out;
  out.reserve(state_->patients.size());
  for (auto& [_, p] : state_->patients) out.push_back(p);
  return out;
}

std::size_t StoreSnapshot::size() const { return state_->observations.size(); }

std::vector<const Observation*> StoreSnapshot::range(const std::string& subject, Stream stream,
                                                     Timestamp from, Timestamp to) const {
  std::vector<const Observation*> out;
  auto it = state_->observations.lower_bound(IdempotencyKey{subject, stream, from, {}});
  for (; it != state_->observations.end(); ++it) {
    auto& key = it->first;
    if (key.subject != subject || key.stream != stream || key.timestamp >= to) break;
    out.push_back(&it->second);
  }
  return out;
}

std::vector<Observation> StoreSnapshot::observations(std::optional<Stream> stream) const {
  std::vector<Observation> out;
  for (auto& [key, obs] : state_->observations) {
    if (!stream || obs.stream == *stream) out.push_back(obs);
  }
  return out;
}

std::vector<EnvironmentSample> StoreSnapshot::env_samples(const std::string& region,
                                                          Date date) const {
  std::vector<EnvironmentSample> out;
  auto from = clock().day_start(date);
  for (auto* obs : range(region, Stream::outdoor_env, from, from + std::chrono::days{1})) {
    out.push_back(std::get<EnvironmentSample>(obs->payload));
  }
  return out;
}

DailyEnvAggregate StoreSnapshot::daily_aggregate(const std::string& region, Date date) const {
  auto samples = env_samples(region, date);
  return aggregate_samples(region, date, samples);
}

DayRecord StoreSnapshot::day_record(const std::string& patient_id, Date date) const {
  auto& p = profile(patient_id);
  DayRecord rec;
  rec.patient_id = patient_id;
  rec.date = date;

  // Questionnaire keys are labelled with the calendar date itself.
  auto label = start_of(date);
  for (auto* obs : range(patient_id, Stream::questionnaire, label, label + std::chrono::days{1})) {
    auto& q = std::get<QuestionnaireResponse>(obs->payload);
    rec.answered = true;
    if (q.slot == Slot::daily) {
      if (q.night_awakening) rec.night_awakening = *q.night_awakening;
      if (q.activity_limitation && *q.activity_limitation != ActivityLimitation::none) {
        rec.activity_limited = true;
      }
    } else {
      rec.symptoms_union = rec.symptoms_union | q.symptoms;
      if (q.rescue && q.rescue->count > 0) rec.rescue_taken = true;
      if (q.controller_taken) {
        rec.controller_asked = true;
        rec.controller_taken = rec.controller_taken || *q.controller_taken;
      }
    }
  }

  auto from = clock().day_start(date);
  auto to = from + std::chrono::days{1};
  for (auto* obs : range(patient_id, Stream::lung, from, to)) {
    auto& r = std::get<LungFunctionReading>(obs->payload);
    rec.lung_readings.push_back({r.pef, r.fev1});
  }
  for (auto* obs : range(patient_id, Stream::medication_event, from, to)) {
    rec.medication_events.push_back(std::get<MedicationEvent>(obs->payload));
  }
  rec.env = daily_aggregate(p.region, date);
  return rec;
}

std::vector<DayRecord> StoreSnapshot::day_records(const std::string& patient_id,
                                                  DateRange range) const {
  profile(patient_id);
  std::vector<DayRecord> out;
  if (range.empty()) return out;
  out.reserve(static_cast<std::size_t>(range.days()));
  for (Date d = range.first; d <= range.last; d = add_days(d, 1)) {
    out.push_back(day_record(patient_id, d));
  }
  return out;
}

std::vector<LungFunctionReading> StoreSnapshot::lung_readings(const std::string& patient_id,
                                                              DateRange range) const {
  std::vector<LungFunctionReading> out;
  if (range.empty()) return out;
  auto from = clock().day_start(range.first);
  auto to = clock().day_start(add_days(range.last, 1));
  for (auto* obs : this->range(patient_id, Stream::lung, from, to)) {
    out.push_back(std::get<LungFunctionReading>(obs->payload));
  }
  return out;
}

int StoreSnapshot::answered_days(const std::string& patient_id, DateRange range) const {
  profile(patient_id);
  if (range.empty()) return 0;
  int answered = 0;
  Date previous{};
  bool any = false;
  for (auto* obs : this->range(patient_id, Stream::questionnaire, start_of(range.first),
                               start_of(add_days(range.last, 1)))) {
    Date d = std::get<QuestionnaireResponse>(obs->payload).date;
    if (!any || d != previous) ++answered;
    previous = d;
    any = true;
  }
  return answered;
}

double StoreSnapshot::answer_rate(const std::string& patient_id) const {
  auto& p = profile(patient_id);
  auto deployment = p.deployment();
  return static_cast<double>(answered_days(patient_id, deployment)) /
         static_cast<double>(deployment.days());
}

std::vector<Alert> StoreSnapshot::alerts(const std::optional<std::string>& patient_id,
                                         std::optional<DateRange> range) const {
  std::vector<Alert> out;
  for (auto& [_, a] : state_->alerts) {
    if (patient_id && a.patient_id != *patient_id) continue;
    if (range && !range->contains(a.date)) continue;
    out.push_back(a);
  }
  return out;
}

std::vector<ConflictEvent> StoreSnapshot::conflicts() const { return state_->conflicts; }

std::string StoreSnapshot::export_ndjson(std::optional<Stream> stream,
                                         bool include_profiles) const {
  std::ostringstream out;
  if (include_profiles) {
    for (auto& [_, p] : state_->patients) {
      out << json{{"profile", profile_to_json(p)}}.dump() << '\n';
    }
  }
  for (auto& [key, obs] : state_->observations) {
    if (stream && obs.stream != *stream) continue;
    out << encode_line(obs) << '\n';
  }
  return out.str();
}

}  // namespace airway
