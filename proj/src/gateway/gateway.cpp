#include "airway/gateway.hpp"

#include <fstream>
#include <mutex>

#include <fmt/format.h>

namespace airway {

TokenRegistry::TokenRegistry(const TokenRegistry& other) {
  std::shared_lock lock(other.mutex_);
  tokens_ = other.tokens_;
}

TokenRegistry& TokenRegistry::operator=(const TokenRegistry& other) {
  if (this == &other) return *this;
  std::map<std::string, DeviceToken, std::less<>> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.tokens_;
  }
  std::unique_lock lock(mutex_);
  tokens_ = std::move(copy);
  return *this;
}

void TokenRegistry::add(DeviceToken token) {
  if (token.token.empty() || token.patient_id.empty()) {
    throw Error(ErrorCode::config_error, "device token needs a secret and a patient");
  }
  std::unique_lock lock(mutex_);
  auto it = tokens_.find(token.token);
  if (it != tokens_.end() && it->second.patient_id != token.patient_id) {
    throw Error(ErrorCode::config_error,
                fmt::format("token already bound to {}", it->second.patient_id));
  }
  tokens_[token.token] = std::move(token);
}

std::string TokenRegistry::authenticate(std::string_view secret, Timestamp now) const {
  std::shared_lock lock(mutex_);
  auto it = tokens_.find(secret);
  if (it == tokens_.end()) throw Error(ErrorCode::unauthorized, "unknown device token");
  if (!(now < it->second.expiry)) throw Error(ErrorCode::unauthorized, "device token expired");
  return it->second.patient_id;
}

std::size_t TokenRegistry::size() const {
  std::shared_lock lock(mutex_);
  return tokens_.size();
}

TokenRegistry TokenRegistry::from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::config_error, "token list must be an array");
  TokenRegistry reg;
  for (auto& item : j) {
    try {
      reg.add({item.at("token").get<std::string>(), item.at("patient_id").get<std::string>(),
               parse_timestamp(item.at("expiry").get<std::string>())});
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::config_error, fmt::format("bad token entry: {}", e.what()));
    }
  }
  return reg;
}

TokenRegistry TokenRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, fmt::format("cannot read {}", path.string()));
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_error, fmt::format("{}: {}", path.string(), e.what()));
  }
}

json to_json(const IngestReceipt& receipt) {
  json rejected = json::array();
  for (auto& r : receipt.rejected) {
    rejected.push_back(
        json{{"index", r.index}, {"code", std::string(to_string(r.code))}, {"reason", r.reason}});
  }
  return json{{"accepted", receipt.accepted},
              {"duplicates", receipt.duplicates},
              {"conflicts", receipt.conflicts},
              {"rejected", std::move(rejected)}};
}

std::vector<std::string_view> split_lines(std::string_view body) {
  std::vector<std::string_view> out;
  while (!body.empty()) {
    auto nl = body.find('\n');
    auto line = body.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) out.push_back(line);
    if (nl == std::string_view::npos) break;
    body.remove_prefix(nl + 1);
  }
  return out;
}

IngestReceipt SyncGateway::ingest(std::string_view secret, std::string_view ndjson,
                                  Timestamp now) {
  auto patient_id = tokens_.authenticate(secret, now);
  return ingest_ndjson(patient_id, ndjson, now);
}

IngestReceipt SyncGateway::ingest_ndjson(const std::string& patient_id, std::string_view ndjson,
                                         Timestamp now) {
  auto lines = split_lines(ndjson);
  if (lines.size() > kMaxBatchSize) {
    throw Error(ErrorCode::batch_too_large,
                fmt::format("batch of {} exceeds {}", lines.size(), kMaxBatchSize));
  }
  std::vector<ValidationResult> items;
  items.reserve(lines.size());
  for (auto line : lines) items.push_back(validate_line(line, now));
  return commit(patient_id, std::move(items));
}

IngestReceipt SyncGateway::ingest_batch(const std::string& patient_id,
                                        std::span<const Observation> batch) {
  if (batch.size() > kMaxBatchSize) {
    throw Error(ErrorCode::batch_too_large,
                fmt::format("batch of {} exceeds {}", batch.size(), kMaxBatchSize));
  }
  std::vector<ValidationResult> items;
  items.reserve(batch.size());
  for (auto& obs : batch) items.push_back(validate_observation(obs));
  return commit(patient_id, std::move(items));
}

IngestReceipt SyncGateway::commit(const std::string& patient_id,
                                  std::vector<ValidationResult> items) {
  IngestReceipt receipt;
  std::vector<Observation> valid;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (auto* rej = std::get_if<Rejection>(&items[i])) {
      receipt.rejected.push_back({i, rej->code, rej->reason});
      continue;
    }
    auto& obs = std::get<Observation>(items[i]);
    // Devices only write their own patient's streams; outdoor data comes
    // from the fetcher.
    if (obs.stream == Stream::outdoor_env || obs.key().subject != patient_id) {
      throw Error(ErrorCode::unauthorized,
                  fmt::format("item {} is not writable by a device bound to {}", i, patient_id));
    }
    valid.push_back(std::move(obs));
  }

  for (auto outcome : store_.upsert_batch(valid)) {
    switch (outcome) {
      case UpsertOutcome::stored: ++receipt.accepted; break;
      case UpsertOutcome::duplicate: ++receipt.duplicates; break;
      case UpsertOutcome::conflict_applied:
        ++receipt.accepted;
        ++receipt.conflicts;
        break;
      case UpsertOutcome::conflict_ignored:
        ++receipt.duplicates;
        ++receipt.conflicts;
        break;
    }
  }
  return receipt;
}

}  // namespace airway
