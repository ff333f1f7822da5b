#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "airway/config.hpp"
#include "airway/gateway.hpp"
#include "airway/store.hpp"

namespace airway {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// HTTP status for an error code.
int http_status(ErrorCode code);
ApiResponse error_response(const Error& e);

/// The /v1 endpoints as plain functions. Every read is answered from one
/// snapshot, so a body is a pure function of the store state and the query.
class ApiService {
 public:
  ApiService(ObservationStore& store, TokenRegistry tokens, ApiConfig config);
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  ApiResponse post_observations(std::string_view authorization, std::string_view body,
                                Timestamp now);
  ApiResponse patients() const;
  ApiResponse timeline(const std::string& patient_id, const QueryParams& q) const;
  ApiResponse episodes(const std::string& patient_id, const QueryParams& q) const;
  ApiResponse triggers(const std::string& patient_id, const QueryParams& q) const;
  ApiResponse summary(const std::string& patient_id, const QueryParams& q) const;
  ApiResponse cohort_triggers(const QueryParams& q) const;
  ApiResponse alerts(const QueryParams& q) const;
  ApiResponse config() const;

  const ApiConfig& settings() const { return config_; }
  TokenRegistry& tokens() { return tokens_; }

 private:
  template <class F>
  ApiResponse guarded(F&& f) const;

  ObservationStore& store_;
  TokenRegistry tokens_;
  ApiConfig config_;
  SyncGateway gateway_;
};

/// JSON for GET /v1/patients/{id}/triggers, shared with `airway analyze`.
json triggers_json(const StoreSnapshot& snap, const std::string& patient_id,
                   std::optional<Date> learning_end, const AnalysisParams& params);

}  // namespace airway
