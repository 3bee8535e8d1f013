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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "shrec/events.hpp"
#include "shrec/service.hpp"

namespace shrec {

using RealDuration = std::chrono::duration<double>;

struct ReplayOptions {
  /// Virtual seconds per real second. Zero or less delivers without pacing.
  double speed = 1000.0;
  /// Replaces std::this_thread::sleep_for, e.g. to record the pacing.
  std::function<void(RealDuration)> sleep;
  /// Ticks the home clock to last event + completion timeout at the end so
  /// that trailing completed antecedents are resolved.
  bool final_tick = true;
};

struct ReplayResult {
  std::size_t delivered = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;  // malformed records
  std::vector<Recommendation> recommendations;
};

/// Feeds a log into an installed home in timestamp order, sleeping
/// gap / speed between events.
ReplayResult replay_log(Service& service, const EventLog& log, const ReplayOptions& options = {});
/// Throws IoError when the file is missing.
ReplayResult replay_file(Service& service, const std::filesystem::path& path,
                         const ReplayOptions& options = {});

/// Follows a growing JSONL or CSV log and hands each complete record to
/// `sink`. Partial trailing lines wait for the next poll; a truncated file
/// is read again from the start.
class FileTailer {
 public:
  using Sink = std::function<void(const Event&)>;

  /// Throws IoError when the file does not exist.
  FileTailer(std::filesystem::path path, Sink sink,
             std::chrono::milliseconds poll_interval = std::chrono::seconds(1));
  ~FileTailer();
  FileTailer(const FileTailer&) = delete;
  FileTailer& operator=(const FileTailer&) = delete;

  /// Reads whatever was appended since the last call; returns the number of
  /// events delivered.
  std::size_t poll_once();
  void start();
  void stop();

  std::size_t delivered() const { return delivered_; }
  std::size_t skipped() const { return skipped_; }

 private:
  void handle_line(const std::string& line);

  std::filesystem::path path_;
  Sink sink_;
  std::chrono::milliseconds interval_;
  LogFormat format_;
  std::uintmax_t offset_ = 0;
  std::string partial_;     // bytes after the last newline
  std::string csv_record_;  // CSV record spanning several lines
  std::optional<std::vector<std::string>> header_;
  std::atomic<std::size_t> delivered_{0};
  std::atomic<std::size_t> skipped_{0};

  std::mutex poll_mutex_;
  std::mutex wait_mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::thread thread_;
};

}  // namespace shrec
