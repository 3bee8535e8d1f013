// Copyright 2026, The shrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shrec/store.hpp"

#include <sqlite3.h>

#include "shrec/errors.hpp"

namespace shrec {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw IoError(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, std::string_view text) {
    sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    sqlite3_bind_int64(stmt_, index, value);
    return *this;
  }
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw IoError(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }
  std::int64_t int_at(int col) const { return sqlite3_column_int64(stmt_, col); }
  std::string text_at(int col) const {
    auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

Store::Store(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw IoError("cannot open store " + path.string() + ": " + msg);
  }
  exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=NORMAL");
  exec(
      "CREATE TABLE IF NOT EXISTS journal ("
      " seq INTEGER PRIMARY KEY AUTOINCREMENT,"
      " home TEXT NOT NULL, kind TEXT NOT NULL, payload TEXT NOT NULL)");
  exec(
      "CREATE TABLE IF NOT EXISTS snapshots ("
      " home TEXT PRIMARY KEY, seq INTEGER NOT NULL, state TEXT NOT NULL)");
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw IoError("sqlite: " + msg);
  }
}

Store::Transaction::Transaction(Store& store) : store_(store), lock_(store.mutex_) {
  store_.exec("BEGIN IMMEDIATE");
}

Store::Transaction::~Transaction() {
  if (!done_) {
    try {
      store_.exec("ROLLBACK");
    } catch (const Error&) {
    }
  }
}

void Store::Transaction::commit() {
  store_.exec("COMMIT");
  done_ = true;
}

std::int64_t Store::append(std::string_view home, std::string_view kind,
                           std::string_view payload) {
  std::lock_guard lock(mutex_);
  Statement st(db_, "INSERT INTO journal (home, kind, payload) VALUES (?, ?, ?)");
  st.bind(1, home).bind(2, kind).bind(3, payload).step();
  return sqlite3_last_insert_rowid(db_);
}

void Store::put_snapshot(std::string_view home, std::int64_t seq, std::string_view state) {
  std::lock_guard lock(mutex_);
  Statement st(db_,
               "INSERT INTO snapshots (home, seq, state) VALUES (?, ?, ?) "
               "ON CONFLICT(home) DO UPDATE SET seq = excluded.seq, state = excluded.state");
  st.bind(1, home).bind(2, seq).bind(3, state).step();
}

std::vector<Store::Snapshot> Store::snapshots() const {
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT home, seq, state FROM snapshots ORDER BY home");
  std::vector<Snapshot> out;
  while (st.step()) out.push_back({st.text_at(0), st.int_at(1), st.text_at(2)});
  return out;
}

std::vector<Store::JournalEntry> Store::journal(std::int64_t after_seq) const {
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT seq, home, kind, payload FROM journal WHERE seq > ? ORDER BY seq");
  st.bind(1, after_seq);
  std::vector<JournalEntry> out;
  while (st.step()) out.push_back({st.int_at(0), st.text_at(1), st.text_at(2), st.text_at(3)});
  return out;
}

void Store::drop_snapshots() {
  std::lock_guard lock(mutex_);
  exec("DELETE FROM snapshots");
}

}  // namespace shrec
