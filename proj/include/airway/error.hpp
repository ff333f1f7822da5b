#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace airway {

enum class ErrorCode {
  schema_violation,
  identity_leak,
  unknown_stream,
  unauthorized,
  storage_unavailable,
  batch_too_large,
  store_corruption,
  unknown_patient,
  unanswered_day,
  empty_period,
  insufficient_episodes,
  no_healthy_range,
  empty_cohort,
  insufficient_data,
  adapter_unavailable,
  adapter_parse_error,
  config_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Worth retrying the same request later.
  bool retryable() const noexcept {
    return code_ == ErrorCode::storage_unavailable || code_ == ErrorCode::adapter_unavailable;
  }

 private:
  ErrorCode code_;
};

}  // namespace airway
