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

#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;

namespace shrec {

/// Single-file SQLite store: an append-only journal of inputs plus the
/// latest state snapshot per home. Snapshots name the journal sequence
/// number they include, so recovery replays only the tail.
class Store {
 public:
  struct JournalEntry {
    std::int64_t seq = 0;
    std::string home;
    std::string kind;
    std::string payload;
  };

  struct Snapshot {
    std::string home;
    std::int64_t seq = 0;
    std::string state;
  };

  /// Creates the file and schema when missing. Throws IoError.
  explicit Store(const std::filesystem::path& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Groups appends and snapshot writes into one atomic commit. Rolls back
  /// unless commit() was called.
  class Transaction {
   public:
    explicit Transaction(Store& store);
    ~Transaction();
    void commit();

   private:
    Store& store_;
    std::unique_lock<std::recursive_mutex> lock_;
    bool done_ = false;
  };

  std::int64_t append(std::string_view home, std::string_view kind, std::string_view payload);
  void put_snapshot(std::string_view home, std::int64_t seq, std::string_view state);
  std::vector<Snapshot> snapshots() const;
  /// Entries with seq > after_seq, ascending.
  std::vector<JournalEntry> journal(std::int64_t after_seq = 0) const;
  void drop_snapshots();

 private:
  void exec(const char* sql);

  sqlite3* db_ = nullptr;
  mutable std::recursive_mutex mutex_;
};

}  // namespace shrec
