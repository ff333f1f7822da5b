#pragma once

#include <optional>
#include <string>
#include <variant>

#include "airway/codec.hpp"
#include "airway/error.hpp"
#include "airway/model.hpp"

namespace airway {

struct Rejection {
  ErrorCode code = ErrorCode::schema_violation;
  std::string reason;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

/// Exactly one of: the accepted observation, or a rejection with reason.
using ValidationResult = std::variant<Observation, Rejection>;

inline bool accepted(const ValidationResult& r) { return r.index() == 0; }

/// Checks the payload's type invariants, slot constraints and that the
/// payload alternative matches `obs.stream`.
std::optional<Rejection> check_invariants(const Observation& obs);

ValidationResult validate_observation(const Observation& obs);

/// Validates one decoded wire object. Identity-bearing keys anywhere in the
/// object are rejected before anything else is looked at. When the object
/// has no "received_at", `default_received_at` is used.
ValidationResult validate_observation(const json& wire, Timestamp default_received_at);

/// Parses and validates one NDJSON line.
ValidationResult validate_line(std::string_view line, Timestamp default_received_at);

/// Throws Error{schema_violation} if the profile breaks its invariants.
void check_profile(const PatientProfile& profile);

/// True if the key names a personal identifier (case-insensitive).
bool is_identity_field(std::string_view key);

}  // namespace airway
