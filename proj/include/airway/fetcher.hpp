#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "airway/codec.hpp"
#include "airway/model.hpp"
#include "airway/store.hpp"

namespace airway {

enum class SourceKind { pollen, aqi_pm25, aqi_ozone, weather_temp_humidity, indoor_air };
std::string_view to_string(SourceKind k);
std::optional<SourceKind> parse_source_kind(std::string_view s);

/// Pollen 12 h, AQI and weather 1 h, indoor air 5 min.
std::chrono::seconds default_cadence(SourceKind k);

struct SourceSpec {
  SourceKind source = SourceKind::pollen;
  std::chrono::seconds cadence{0};
  std::string scope;  // region, or patient id for indoor air
  std::filesystem::path fixture;

  std::string id() const;  // "<source>/<scope>"
  /// Throws Error{config_error} unless cadence > 0 and scope is set.
  void validate() const;
};

SourceSpec make_source(SourceKind kind, std::string scope, std::filesystem::path fixture = {});

struct PlanEntry {
  SourceSpec spec;
  Timestamp next_due;
};

struct PollPlan {
  std::vector<PlanEntry> entries;
};

/// Every source first due at `start`.
PollPlan make_plan(std::vector<SourceSpec> specs, Timestamp start);

struct TickResult {
  std::vector<PlanEntry> due;  // with the next_due they were due at
  PollPlan plan;
};

/// Sources with next_due <= now; each of them advances by one cadence.
TickResult schedule_tick(const PollPlan& plan, Timestamp now);

/// Source of environmental samples. `fetch` returns payloads with
/// from < timestamp <= to that match the spec, and throws
/// Error{adapter_unavailable} when the source cannot be reached.
class SourceAdapter {
 public:
  virtual ~SourceAdapter() = default;
  virtual std::vector<Payload> fetch(const SourceSpec& spec, Timestamp from, Timestamp to) = 0;
};

/// Replays an NDJSON fixture of observation lines (outdoor_env or
/// indoor_env). Malformed lines are dropped and logged.
class FixtureAdapter final : public SourceAdapter {
 public:
  /// Missing file: every fetch raises Error{adapter_unavailable}.
  explicit FixtureAdapter(std::filesystem::path path);
  static FixtureAdapter from_text(std::string_view ndjson);

  std::vector<Payload> fetch(const SourceSpec& spec, Timestamp from, Timestamp to) override;

  std::size_t parse_errors() const { return parse_errors_; }
  std::size_t size() const { return samples_.size(); }
  /// Simulates an outage.
  void set_available(bool available) { available_ = available; }

 private:
  FixtureAdapter() = default;
  void load(std::string_view text);

  std::vector<std::pair<Timestamp, Payload>> samples_;  // sorted by timestamp
  std::size_t parse_errors_ = 0;
  bool available_ = true;
  std::string origin_;
};

/// Samples for one due slot: window (due - cadence, min(due, now)].
std::vector<Payload> poll_source(SourceAdapter& adapter, const SourceSpec& spec, Timestamp due,
                                 Timestamp now);

struct FetchStats {
  std::size_t polls = 0;
  std::size_t samples = 0;
  std::size_t stored = 0;
  std::size_t failures = 0;
};

/// Drives the plan against adapters and writes samples into the store.
/// Samples are stamped with the slot's due time as received_at, so a replay
/// of the same fixture and schedule produces the same store.
class EnvFetcher {
 public:
  EnvFetcher(ObservationStore& store, PollPlan plan) : store_(store), plan_(std::move(plan)) {}

  /// Adapter used for one source kind; sources without one are skipped.
  void set_adapter(SourceKind kind, std::shared_ptr<SourceAdapter> adapter);

  /// One tick. Failed sources keep their previous next_due.
  FetchStats tick(Timestamp now);
  /// Ticks until nothing is due or every due source failed.
  FetchStats run_until(Timestamp now);

  const PollPlan& plan() const { return plan_; }

 private:
  ObservationStore& store_;
  PollPlan plan_;
  std::map<SourceKind, std::shared_ptr<SourceAdapter>> adapters_;
};

struct FetcherConfig {
  Timestamp start;
  std::vector<SourceSpec> sources;
};

/// {"start": "...", "sources": [{"source": "pollen", "scope": "...",
///   "fixture": "...", "cadence_seconds": 43200}]}. Relative fixture paths
/// resolve against `base_dir`. Throws Error{config_error}.
FetcherConfig fetcher_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
FetcherConfig load_fetcher_config(const std::filesystem::path& path);

}  // namespace airway
