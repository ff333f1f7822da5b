#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "airway/attribution.hpp"
#include "airway/codec.hpp"
#include "airway/season.hpp"

namespace airway {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_path;  // empty: in-memory
  std::optional<std::filesystem::path> tokens_path;
  std::optional<std::filesystem::path> ui_dir;
  int utc_offset_minutes = 0;
  AnalysisParams params;

  /// Throws Error{config_error}.
  void validate() const;
};

/// Strict: unknown keys and bad values raise Error{config_error}. Relative
/// paths resolve against `base_dir`.
ApiConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ApiConfig load_config(const std::filesystem::path& path);

/// {"winter": {"from": "12-01", "to": "02-29"}, ...} with all four seasons.
SeasonConfig seasons_from_json(const json& j);
SeasonConfig load_seasons(const std::filesystem::path& path);

json to_json(const SeasonConfig& seasons);
json to_json(const HealthyRanges& ranges);
json to_json(const AnalysisParams& params);

inline constexpr const char* kConfigEnvVar = "AIRWAY_CONFIG";

}  // namespace airway
