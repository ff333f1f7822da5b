#include <sqlite3.h>

#include <fmt/format.h>

#include "airway/error.hpp"
#include "airway/store.hpp"

namespace airway {
namespace {

struct StatementDeleter {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using Statement = std::unique_ptr<sqlite3_stmt, StatementDeleter>;

class SqliteBackend final : public StorageBackend {
 public:
  explicit SqliteBackend(const std::filesystem::path& path) {
    sqlite3* raw = nullptr;
    int rc = sqlite3_open_v2(path.c_str(), &raw,
                             SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                             nullptr);
    db_.reset(raw);
    if (rc != SQLITE_OK) {
      throw Error(ErrorCode::storage_unavailable,
                  fmt::format("cannot open store {}: {}", path.string(),
                              raw ? sqlite3_errmsg(raw) : "out of memory"));
    }
    sqlite3_busy_timeout(db_.get(), 2000);
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=NORMAL");
    exec(R"SQL(
CREATE TABLE IF NOT EXISTS observations (key TEXT PRIMARY KEY, line TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS patients (id TEXT PRIMARY KEY, body TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS alerts (key TEXT PRIMARY KEY, body TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS conflicts (seq INTEGER PRIMARY KEY AUTOINCREMENT, body TEXT NOT NULL);
)SQL");
  }

  LoadedRows load() override {
    LoadedRows rows;
    rows.observations = column("SELECT line FROM observations ORDER BY key");
    rows.patients = column("SELECT body FROM patients ORDER BY id");
    rows.alerts = column("SELECT body FROM alerts ORDER BY key");
    rows.conflicts = column("SELECT body FROM conflicts ORDER BY seq");
    return rows;
  }

  void commit(const CommitSet& rows) override {
    if (rows.empty()) return;
    exec("BEGIN IMMEDIATE");
    try {
      upsert_pairs("INSERT OR REPLACE INTO observations (key, line) VALUES (?1, ?2)",
                   rows.observations);
      upsert_pairs("INSERT OR REPLACE INTO patients (id, body) VALUES (?1, ?2)", rows.patients);
      upsert_pairs("INSERT OR REPLACE INTO alerts (key, body) VALUES (?1, ?2)", rows.alerts);
      auto stmt = prepare("INSERT INTO conflicts (body) VALUES (?1)");
      for (auto& body : rows.conflicts) {
        sqlite3_bind_text(stmt.get(), 1, body.data(), static_cast<int>(body.size()),
                          SQLITE_TRANSIENT);
        step_done(stmt.get());
        sqlite3_reset(stmt.get());
      }
      exec("COMMIT");
    } catch (...) {
      sqlite3_exec(db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
      throw;
    }
  }

 private:
  struct DbDeleter {
    void operator()(sqlite3* db) const { sqlite3_close(db); }
  };

  [[noreturn]] void fail(const char* what) const {
    throw Error(ErrorCode::storage_unavailable,
                fmt::format("{}: {}", what, sqlite3_errmsg(db_.get())));
  }

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_.get(), sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(ErrorCode::storage_unavailable, fmt::format("sqlite: {}", msg));
    }
  }

  Statement prepare(const char* sql) {
    sqlite3_stmt* raw = nullptr;
    if (sqlite3_prepare_v2(db_.get(), sql, -1, &raw, nullptr) != SQLITE_OK) fail("prepare");
    return Statement{raw};
  }

  void step_done(sqlite3_stmt* stmt) {
    if (sqlite3_step(stmt) != SQLITE_DONE) fail("write");
  }

  void upsert_pairs(const char* sql,
                    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) return;
    auto stmt = prepare(sql);
    for (auto& [k, v] : pairs) {
      sqlite3_bind_text(stmt.get(), 1, k.data(), static_cast<int>(k.size()), SQLITE_TRANSIENT);
      sqlite3_bind_text(stmt.get(), 2, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
      step_done(stmt.get());
      sqlite3_reset(stmt.get());
    }
  }

  std::vector<std::string> column(const char* sql) {
    std::vector<std::string> out;
    auto stmt = prepare(sql);
    int rc;
    while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW) {
      auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), 0));
      out.emplace_back(text ? text : "");
    }
    if (rc != SQLITE_DONE) fail("read");
    return out;
  }

  std::unique_ptr<sqlite3, DbDeleter> db_;
};

}  // namespace

std::unique_ptr<StorageBackend> make_sqlite_backend(const std::filesystem::path& path) {
  return std::make_unique<SqliteBackend>(path);
}

}  // namespace airway
