#include "airway/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "airway/error.hpp"

namespace airway {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad(fmt::format("cannot read {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void only_keys(const json& j, std::initializer_list<std::string_view> allowed,
               std::string_view where) {
  if (!j.is_object()) bad(fmt::format("{} must be an object", where));
  for (auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(fmt::format("unknown key {} in {}", key, where));
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path = p;
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::chrono::month_day parse_month_day(const std::string& s) {
  unsigned m = 0, d = 0;
  char dash = 0;
  if (std::sscanf(s.c_str(), "%2u%c%2u", &m, &dash, &d) != 3 || dash != '-' || s.size() != 5) {
    bad(fmt::format("bad month-day {}", s));
  }
  std::chrono::month_day md{std::chrono::month{m}, std::chrono::day{d}};
  if (!md.ok()) bad(fmt::format("bad month-day {}", s));
  return md;
}

std::string format_month_day(std::chrono::month_day md) {
  return fmt::format("{:02}-{:02}", static_cast<unsigned>(md.month()),
                     static_cast<unsigned>(md.day()));
}

}  // namespace

void ApiConfig::validate() const {
  if (host.empty()) bad("bind host is empty");
  if (port < 0 || port > 65535) bad(fmt::format("port {} out of range", port));
  if (utc_offset_minutes < -24 * 60 || utc_offset_minutes > 24 * 60) {
    bad("utc offset must lie within one day");
  }
  params.validate();
}

SeasonConfig seasons_from_json(const json& j) {
  only_keys(j, {"winter", "spring", "summer", "fall"}, "seasons");
  std::array<SeasonInterval, 4> intervals{};
  for (auto s : kAllSeasons) {
    auto name = std::string(to_string(s));
    if (!j.contains(name)) bad(fmt::format("season {} missing", name));
    auto& iv = j.at(name);
    only_keys(iv, {"from", "to"}, name);
    try {
      intervals[static_cast<std::size_t>(s)] = {parse_month_day(iv.at("from").get<std::string>()),
                                                parse_month_day(iv.at("to").get<std::string>())};
    } catch (const json::exception& e) {
      bad(fmt::format("season {}: {}", name, e.what()));
    }
  }
  return SeasonConfig(intervals);
}

SeasonConfig load_seasons(const std::filesystem::path& path) {
  return seasons_from_json(read_json(path));
}

ApiConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  only_keys(j,
            {"host", "port", "store", "tokens", "ui_dir", "utc_offset_minutes", "seasons",
             "healthy_ranges", "analysis"},
            "config");
  ApiConfig c;
  try {
    if (j.contains("host")) c.host = j.at("host").get<std::string>();
    if (j.contains("port")) c.port = j.at("port").get<int>();
    if (j.contains("store")) c.store_path = resolve(base_dir, j.at("store").get<std::string>());
    if (j.contains("tokens")) c.tokens_path = resolve(base_dir, j.at("tokens").get<std::string>());
    if (j.contains("ui_dir")) c.ui_dir = resolve(base_dir, j.at("ui_dir").get<std::string>());
    if (j.contains("utc_offset_minutes")) {
      c.utc_offset_minutes = j.at("utc_offset_minutes").get<int>();
    }
    if (j.contains("seasons")) {
      auto& s = j.at("seasons");
      c.params.seasons = s.is_string() ? load_seasons(resolve(base_dir, s.get<std::string>()))
                                       : seasons_from_json(s);
    }
    if (j.contains("healthy_ranges")) {
      auto& hr = j.at("healthy_ranges");
      only_keys(hr, {"pollen", "pm25", "ozone"}, "healthy_ranges");
      for (auto t : kAllTriggers) {
        auto name = std::string(to_string(t));
        if (!hr.contains(name)) continue;
        auto& pair = hr.at(name);
        if (!pair.is_array() || pair.size() != 2) {
          bad(fmt::format("healthy range for {} must be [lower, upper]", name));
        }
        c.params.ranges.set(t, pair[0].get<double>(), pair[1].get<double>());
      }
    }
    if (j.contains("analysis")) {
      auto& a = j.at("analysis");
      only_keys(a,
                {"prolonged_window", "prolonged_min", "smoothing_days", "min_episode_days",
                 "learning_fraction", "eligibility_threshold", "baseline_learning_only"},
                "analysis");
      auto& p = c.params;
      if (a.contains("prolonged_window")) p.prolonged_window = a.at("prolonged_window").get<int>();
      if (a.contains("prolonged_min")) p.prolonged_min = a.at("prolonged_min").get<int>();
      if (a.contains("smoothing_days")) p.smoothing_days = a.at("smoothing_days").get<int>();
      if (a.contains("min_episode_days")) p.min_episode_days = a.at("min_episode_days").get<int>();
      if (a.contains("learning_fraction")) {
        p.learning_fraction = a.at("learning_fraction").get<double>();
      }
      if (a.contains("eligibility_threshold")) {
        p.eligibility_threshold = a.at("eligibility_threshold").get<double>();
      }
      if (a.contains("baseline_learning_only")) {
        p.baseline_learning_only = a.at("baseline_learning_only").get<bool>();
      }
    }
  } catch (const json::exception& e) {
    bad(fmt::format("bad config value: {}", e.what()));
  }
  c.validate();
  return c;
}

ApiConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json(path), path.parent_path());
}

json to_json(const SeasonConfig& seasons) {
  json j = json::object();
  for (auto s : kAllSeasons) {
    auto& iv = seasons.interval(s);
    j[std::string(to_string(s))] = {{"from", format_month_day(iv.first)},
                                    {"to", format_month_day(iv.last)}};
  }
  return j;
}

json to_json(const HealthyRanges& ranges) {
  json j = json::object();
  for (auto t : kAllTriggers) {
    auto& r = ranges.of(t);
    j[std::string(to_string(t))] = {{"lower", r.lower}, {"upper", r.upper},
                                    {"label", std::string(display_name(t))}};
  }
  return j;
}

json to_json(const AnalysisParams& p) {
  return json{{"prolonged_window", p.prolonged_window},
              {"prolonged_min", p.prolonged_min},
              {"smoothing_days", p.smoothing_days},
              {"min_episode_days", p.min_episode_days},
              {"learning_fraction", p.learning_fraction},
              {"eligibility_threshold", p.eligibility_threshold},
              {"baseline_learning_only", p.baseline_learning_only}};
}

}  // namespace airway
