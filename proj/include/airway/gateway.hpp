#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airway/codec.hpp"
#include "airway/error.hpp"
#include "airway/store.hpp"
#include "airway/validation.hpp"

namespace airway {

struct DeviceToken {
  std::string token;
  std::string patient_id;
  Timestamp expiry;  // valid while now < expiry
};

/// Known device tokens. Safe for concurrent use.
class TokenRegistry {
 public:
  TokenRegistry() = default;
  TokenRegistry(const TokenRegistry& other);
  TokenRegistry& operator=(const TokenRegistry& other);

  /// Re-registering a secret for a different patient is a config error.
  void add(DeviceToken token);
  /// Bound patient id. Throws Error{unauthorized} for unknown or expired tokens.
  std::string authenticate(std::string_view secret, Timestamp now) const;
  std::size_t size() const;

  /// [{"token": "...", "patient_id": "...", "expiry": "RFC 3339"}, ...]
  static TokenRegistry from_json(const json& j);
  static TokenRegistry load(const std::filesystem::path& path);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, DeviceToken, std::less<>> tokens_;
};

struct RejectedItem {
  std::size_t index = 0;
  ErrorCode code = ErrorCode::schema_violation;
  std::string reason;
};

/// accepted + duplicates + rejected.size() == batch size. `conflicts` counts
/// the accepted or duplicate items whose key was already stored with a
/// different payload.
struct IngestReceipt {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t conflicts = 0;
  std::vector<RejectedItem> rejected;

  std::size_t total() const { return accepted + duplicates + rejected.size(); }
};

json to_json(const IngestReceipt& receipt);

inline constexpr std::size_t kMaxBatchSize = 10'000;

/// Device-facing ingest. Holds no state of its own besides references, so
/// one instance can serve concurrent requests.
class SyncGateway {
 public:
  SyncGateway(ObservationStore& store, const TokenRegistry& tokens)
      : store_(store), tokens_(tokens) {}

  /// Authenticates and ingests an NDJSON body.
  IngestReceipt ingest(std::string_view secret, std::string_view ndjson, Timestamp now);

  /// Per-line validation, then one atomic upsert of the valid items.
  /// Throws Error{batch_too_large}, Error{unauthorized} when a valid item
  /// belongs to someone else, Error{storage_unavailable}.
  IngestReceipt ingest_ndjson(const std::string& patient_id, std::string_view ndjson,
                              Timestamp now);
  IngestReceipt ingest_batch(const std::string& patient_id, std::span<const Observation> batch);

 private:
  IngestReceipt commit(const std::string& patient_id, std::vector<ValidationResult> items);

  ObservationStore& store_;
  const TokenRegistry& tokens_;
};

/// Splits an NDJSON body into non-blank lines.
std::vector<std::string_view> split_lines(std::string_view body);

}  // namespace airway
