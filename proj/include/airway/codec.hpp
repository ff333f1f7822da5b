#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "airway/model.hpp"

namespace airway {

using json = nlohmann::json;

// Canonical wire encoding. Objects are emitted with sorted keys and
// shortest round-trip doubles, so encoding is a pure function of the value.

json payload_to_json(const Payload& payload);
json observation_to_json(const Observation& obs);

/// One NDJSON line, without the trailing newline.
std::string encode_line(const Observation& obs);

json profile_to_json(const PatientProfile& profile);
/// Throws Error{schema_violation} on malformed input.
PatientProfile profile_from_json(const json& j);

/// Strict payload decoding for a known stream. Unknown keys and type errors
/// raise Error{schema_violation}; invariants are not checked here.
Payload payload_from_json(Stream stream, const json& j);

}  // namespace airway
