#include "airway/fetcher.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "airway/error.hpp"
#include "airway/validation.hpp"

namespace airway {

using namespace std::chrono_literals;

namespace {

constexpr std::array<std::pair<SourceKind, std::string_view>, 5> kSourceNames = {{
    {SourceKind::pollen, "pollen"},
    {SourceKind::aqi_pm25, "aqi_pm25"},
    {SourceKind::aqi_ozone, "aqi_ozone"},
    {SourceKind::weather_temp_humidity, "weather_temp_humidity"},
    {SourceKind::indoor_air, "indoor_air"},
}};

Timestamp timestamp_of(const Payload& p) {
  if (auto* e = std::get_if<EnvironmentSample>(&p)) return e->timestamp;
  return std::get<IndoorAirSample>(p).timestamp;
}

bool matches(const SourceSpec& spec, const Payload& p) {
  if (auto* in = std::get_if<IndoorAirSample>(&p)) {
    return spec.source == SourceKind::indoor_air && in->patient_id == spec.scope;
  }
  auto& e = std::get<EnvironmentSample>(p);
  if (e.region != spec.scope) return false;
  switch (spec.source) {
    case SourceKind::pollen: return e.parameter == EnvParameter::pollen;
    case SourceKind::aqi_pm25: return e.parameter == EnvParameter::pm25;
    case SourceKind::aqi_ozone: return e.parameter == EnvParameter::ozone;
    case SourceKind::weather_temp_humidity:
      return e.parameter == EnvParameter::temperature || e.parameter == EnvParameter::humidity;
    case SourceKind::indoor_air: return false;
  }
  return false;
}

}  // namespace

std::string_view to_string(SourceKind k) {
  for (auto& [kind, name] : kSourceNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  for (auto& [kind, name] : kSourceNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::chrono::seconds default_cadence(SourceKind k) {
  switch (k) {
    case SourceKind::pollen: return 12h;
    case SourceKind::aqi_pm25:
    case SourceKind::aqi_ozone:
    case SourceKind::weather_temp_humidity: return 1h;
    case SourceKind::indoor_air: return 5min;
  }
  return 1h;
}

std::string SourceSpec::id() const { return fmt::format("{}/{}", to_string(source), scope); }

void SourceSpec::validate() const {
  if (cadence <= 0s) {
    throw Error(ErrorCode::config_error, fmt::format("{}: cadence must be positive", id()));
  }
  if (scope.empty()) {
    throw Error(ErrorCode::config_error,
                fmt::format("{} source needs a region or patient scope", to_string(source)));
  }
}

SourceSpec make_source(SourceKind kind, std::string scope, std::filesystem::path fixture) {
  return {kind, default_cadence(kind), std::move(scope), std::move(fixture)};
}

PollPlan make_plan(std::vector<SourceSpec> specs, Timestamp start) {
  PollPlan plan;
  for (auto& s : specs) {
    s.validate();
    plan.entries.push_back({std::move(s), start});
  }
  return plan;
}

TickResult schedule_tick(const PollPlan& plan, Timestamp now) {
  TickResult r{{}, plan};
  for (auto& e : r.plan.entries) {
    if (e.next_due <= now) {
      r.due.push_back(e);
      e.next_due += e.spec.cadence;
    }
  }
  return r;
}

// ---- fixture adapter ----

FixtureAdapter::FixtureAdapter(std::filesystem::path path) : origin_(path.string()) {
  std::ifstream in(path);
  if (!in) {
    available_ = false;
    return;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  load(buf.str());
}

FixtureAdapter FixtureAdapter::from_text(std::string_view ndjson) {
  FixtureAdapter a;
  a.origin_ = "<memory>";
  a.load(ndjson);
  return a;
}

void FixtureAdapter::load(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    auto result = validate_line(line, Timestamp{});
    auto* obs = std::get_if<Observation>(&result);
    if (!obs || (obs->stream != Stream::outdoor_env && obs->stream != Stream::indoor_env)) {
      ++parse_errors_;
      spdlog::warn("{}:{}: dropped sample: {}", origin_, line_no,
                   obs ? "not an environment sample" : std::get<Rejection>(result).reason);
      continue;
    }
    samples_.emplace_back(timestamp_of(obs->payload), obs->payload);
  }
  std::stable_sort(samples_.begin(), samples_.end(),
                   [](auto& a, auto& b) { return a.first < b.first; });
}

std::vector<Payload> FixtureAdapter::fetch(const SourceSpec& spec, Timestamp from, Timestamp to) {
  if (!available_) {
    throw Error(ErrorCode::adapter_unavailable, fmt::format("{} is unavailable", origin_));
  }
  std::vector<Payload> out;
  auto it = std::upper_bound(samples_.begin(), samples_.end(), from,
                             [](Timestamp t, auto& s) { return t < s.first; });
  for (; it != samples_.end() && it->first <= to; ++it) {
    if (matches(spec, it->second)) out.push_back(it->second);
  }
  return out;
}

std::vector<Payload> poll_source(SourceAdapter& adapter, const SourceSpec& spec, Timestamp due,
                                 Timestamp now) {
  return adapter.fetch(spec, due - spec.cadence, std::min(due, now));
}

// ---- runner ----

void EnvFetcher::set_adapter(SourceKind kind, std::shared_ptr<SourceAdapter> adapter) {
  adapters_[kind] = std::move(adapter);
}

FetchStats EnvFetcher::tick(Timestamp now) {
  FetchStats stats;
  auto result = schedule_tick(plan_, now);
  std::vector<Observation> batch;
  for (auto& due : result.due) {
    auto it = adapters_.find(due.spec.source);
    if (it == adapters_.end()) continue;
    ++stats.polls;
    try {
      for (auto& p : poll_source(*it->second, due.spec, due.next_due, now)) {
        batch.push_back(make_observation(std::move(p), due.next_due));
        ++stats.samples;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::adapter_unavailable) throw;
      ++stats.failures;
      spdlog::warn("poll {} at {} failed: {}", due.spec.id(), format_timestamp(due.next_due),
                   e.what());
      for (auto& entry : result.plan.entries) {
        if (entry.spec.id() == due.spec.id()) entry.next_due = due.next_due;
      }
    }
  }
  if (!batch.empty()) {
    for (auto outcome : store_.upsert_batch(batch)) {
      if (outcome == UpsertOutcome::stored || outcome == UpsertOutcome::conflict_applied) {
        ++stats.stored;
      }
    }
  }
  plan_ = std::move(result.plan);
  return stats;
}

FetchStats EnvFetcher::run_until(Timestamp now) {
  FetchStats total;
  for (;;) {
    auto s = tick(now);
    total.polls += s.polls;
    total.samples += s.samples;
    total.stored += s.stored;
    total.failures += s.failures;
    if (s.polls == 0 || s.failures == s.polls) break;
  }
  return total;
}

// ---- config ----

FetcherConfig fetcher_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::config_error, msg); };
  if (!j.is_object()) bad("fetcher config must be an object");
  FetcherConfig cfg;
  try {
    cfg.start = parse_timestamp(j.at("start").get<std::string>());
    for (auto& item : j.at("sources")) {
      auto kind = parse_source_kind(item.at("source").get<std::string>());
      if (!kind) bad(fmt::format("unknown source {}", item.at("source").dump()));
      SourceSpec spec = make_source(*kind, item.at("scope").get<std::string>());
      if (item.contains("cadence_seconds")) {
        spec.cadence = std::chrono::seconds{item.at("cadence_seconds").get<std::int64_t>()};
      }
      if (item.contains("fixture")) {
        std::filesystem::path p = item.at("fixture").get<std::string>();
        spec.fixture = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      }
      spec.validate();
      cfg.sources.push_back(std::move(spec));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad(fmt::format("bad fetcher config: {}", e.what()));
  }
  return cfg;
}

FetcherConfig load_fetcher_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, fmt::format("cannot read {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_error, fmt::format("{}: {}", path.string(), e.what()));
  }
  return fetcher_config_from_json(j, path.parent_path());
}

}  // namespace airway
