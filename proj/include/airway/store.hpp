#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "airway/alert.hpp"
#include "airway/model.hpp"
#include "airway/time.hpp"

namespace airway {

enum class UpsertOutcome {
  stored,            // new key
  duplicate,         // identical payload already stored
  conflict_applied,  // different payload, incoming write is later and replaced it
  conflict_ignored,  // different payload, stored write is later and was kept
};

std::string_view to_string(UpsertOutcome outcome);

/// A re-sent key whose payload differed from what was stored.
struct ConflictEvent {
  IdempotencyKey key;
  Timestamp kept_received_at;
  Timestamp dropped_received_at;
};

/// Rows handed to a backend in one atomic commit.
struct CommitSet {
  std::vector<std::pair<std::string, std::string>> observations;  // key -> NDJSON line
  std::vector<std::pair<std::string, std::string>> patients;      // id -> JSON
  std::vector<std::pair<std::string, std::string>> alerts;        // key -> JSON
  std::vector<std::string> conflicts;                             // JSON

  bool empty() const {
    return observations.empty() && patients.empty() && alerts.empty() && conflicts.empty();
  }
};

struct LoadedRows {
  std::vector<std::string> observations;
  std::vector<std::string> patients;
  std::vector<std::string> alerts;
  std::vector<std::string> conflicts;
};

/// Durable storage under the in-memory index. `commit` is all-or-nothing and
/// raises Error{storage_unavailable} when the write could not be made durable.
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;
  virtual LoadedRows load() = 0;
  virtual void commit(const CommitSet& rows) = 0;
};

/// Single-file SQLite backend.
std::unique_ptr<StorageBackend> make_sqlite_backend(const std::filesystem::path& path);

struct StoreOptions {
  LocalClock clock;
};

/// Daily environmental aggregate for one region. Absent parameters stay
/// empty; nothing is zero-filled.
struct DailyEnvAggregate {
  std::string region;
  Date date;
  std::optional<double> pollen_max;
  std::optional<double> pm25_max;
  std::optional<double> ozone_max;
  std::optional<double> temp_min;
  std::optional<double> temp_max;
  std::optional<double> humidity_min;
  std::optional<double> humidity_max;
  std::array<int, kEnvParameterCount> samples_present{};

  /// Daily maximum for pollen/pm25/ozone/temperature/humidity.
  std::optional<double> max_of(EnvParameter p) const;
  bool missing(EnvParameter p) const { return samples_present[static_cast<std::size_t>(p)] == 0; }

  friend bool operator==(const DailyEnvAggregate&, const DailyEnvAggregate&) = default;
};

/// Folds samples of one region-day into an aggregate. Exposed so forecast
/// fixtures aggregate exactly like stored data.
DailyEnvAggregate aggregate_samples(const std::string& region, Date date,
                                    std::span<const EnvironmentSample> samples);

struct LungPair {
  double pef = 0;
  double fev1 = 0;
  friend bool operator==(const LungPair&, const LungPair&) = default;
};

/// One patient-day with questionnaire slots, lung readings and the region's
/// environmental aggregate fused together.
struct DayRecord {
  std::string patient_id;
  Date date;
  bool answered = false;
  SymptomSet symptoms_union;
  bool rescue_taken = false;
  bool controller_asked = false;
  bool controller_taken = false;
  std::optional<bool> night_awakening;
  bool activity_limited = false;
  std::vector<LungPair> lung_readings;
  std::vector<MedicationEvent> medication_events;
  DailyEnvAggregate env;

  friend bool operator==(const DayRecord&, const DayRecord&) = default;
};

class ObservationStore;

/// Consistent read view. Holds a shared lock for its lifetime, so a batch is
/// either fully visible or not at all; release it promptly.
class StoreSnapshot {
 public:
  const PatientProfile& profile(const std::string& patient_id) const;
  const PatientProfile* find_profile(const std::string& patient_id) const;
  std::vector<PatientProfile> patients() const;

  /// Observations of one subject/stream with timestamp in [from, to), key order.
  std::vector<const Observation*> range(const std::string& subject, Stream stream,
                                        Timestamp from, Timestamp to) const;
  std::vector<Observation> observations(std::optional<Stream> stream = std::nullopt) const;
  std::size_t size() const;

  std::vector<EnvironmentSample> env_samples(const std::string& region, Date date) const;
  DailyEnvAggregate daily_aggregate(const std::string& region, Date date) const;

  /// One record per calendar day of `range`, ordered by date. Throws
  /// Error{unknown_patient}.
  std::vector<DayRecord> day_records(const std::string& patient_id, DateRange range) const;
  DayRecord day_record(const std::string& patient_id, Date date) const;

  std::vector<LungFunctionReading> lung_readings(const std::string& patient_id,
                                                 DateRange range) const;

  /// Answered days divided by deployment days. Throws Error{unknown_patient}.
  double answer_rate(const std::string& patient_id) const;
  int answered_days(const std::string& patient_id, DateRange range) const;

  std::vector<Alert> alerts(const std::optional<std::string>& patient_id,
                            std::optional<DateRange> range) const;

  std::vector<ConflictEvent> conflicts() const;
  const LocalClock& clock() const;

  /// Canonical NDJSON dump (profiles first, then observations in key order).
  /// Two stores with equal content produce byte-identical exports.
  std::string export_ndjson(std::optional<Stream> stream = std::nullopt,
                            bool include_profiles = true) const;

 private:
  friend class ObservationStore;
  struct State;
  StoreSnapshot(std::shared_lock<std::shared_mutex> lock, const State& state);

  std::shared_lock<std::shared_mutex> lock_;
  const State* state_;
};

/// Idempotent observation store. Upserts are serialized through one writer
/// lock and committed to the backend before they become visible.
class ObservationStore {
 public:
  static ObservationStore in_memory(StoreOptions options = {});
  static ObservationStore open(const std::filesystem::path& path, StoreOptions options = {});

  ObservationStore(std::unique_ptr<StorageBackend> backend, StoreOptions options);
  ObservationStore(ObservationStore&&) noexcept;
  ObservationStore& operator=(ObservationStore&&) noexcept;
  ~ObservationStore();

  /// Caller validates first. Throws Error{storage_unavailable}.
  UpsertOutcome upsert(const Observation& obs);

  /// Applies a batch atomically: either every outcome is committed or none.
  std::vector<UpsertOutcome> upsert_batch(std::span<const Observation> batch);

  void register_patient(const PatientProfile& profile);

  /// Materializes alerts; ones already present are skipped. Returns new count.
  std::size_t put_alerts(std::span<const Alert> alerts);

  StoreSnapshot snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace airway
