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

#include "shrec/intake.hpp"

#include <fstream>
#include <spdlog/spdlog.h>

#include "shrec/errors.hpp"

namespace shrec {

ReplayResult replay_log(Service& service, const EventLog& log, const ReplayOptions& options) {
  ReplayResult result;
  if (log.events.empty()) return result;
  auto sleep = options.sleep ? options.sleep
                             : [](RealDuration d) { std::this_thread::sleep_for(d); };
  if (options.speed <= 0) {
    auto batch = service.ingest_batch(log.events);
    result.delivered = batch.accepted;
    result.rejected = batch.rejected;
    result.recommendations = std::move(batch.recommendations);
  } else {
    std::optional<Timestamp> previous;
    for (const auto& event : log.events) {
      if (previous && event.timestamp > *previous) {
        sleep(RealDuration(static_cast<double>((event.timestamp - *previous).count()) / options.speed));
      }
      previous = event.timestamp;
      try {
        auto emitted = service.ingest(event);
        result.recommendations.insert(result.recommendations.end(), emitted.begin(),
                                      emitted.end());
        ++result.delivered;
      } catch (const NotFoundError&) {
        throw;
      } catch (const Error& err) {
        spdlog::warn("replay rejected event at {}: {}", format_iso8601(event.timestamp),
                     err.what());
        ++result.rejected;
      }
    }
  }
  if (options.final_tick && service.has_home(log.home_id)) {
    auto timeout = service.policy(log.home_id).completion_timeout;
    auto emitted = service.tick(log.home_id, log.events.back().timestamp + timeout);
    result.recommendations.insert(result.recommendations.end(), emitted.begin(), emitted.end());
  }
  return result;
}

ReplayResult replay_file(Service& service, const std::filesystem::path& path,
                         const ReplayOptions& options) {
  if (!std::filesystem::exists(path)) throw IoError("no such log file: " + path.string());
  auto parsed = parse_log_file(path);
  auto result = replay_log(service, parsed.log, options);
  result.skipped = parsed.skipped;
  return result;
}

FileTailer::FileTailer(std::filesystem::path path, Sink sink,
                       std::chrono::milliseconds poll_interval)
    : path_(std::move(path)),
      sink_(std::move(sink)),
      interval_(poll_interval),
      format_(format_for_path(path_)) {
  if (!std::filesystem::exists(path_)) throw IoError("no such log file: " + path_.string());
}

FileTailer::~FileTailer() { stop(); }

void FileTailer::handle_line(const std::string& raw) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (format_ == LogFormat::jsonl) {
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    if (auto event = parse_event_json(line)) {
      sink_(*event);
      ++delivered_;
    } else {
      ++skipped_;
      spdlog::warn("skipping malformed record in {}", path_.string());
    }
    return;
  }
  csv_record_ += csv_record_.empty() ? line : "\n" + line;
  bool complete = true;
  auto fields = split_csv_record(csv_record_, complete);
  if (!complete) return;
  csv_record_.clear();
  if (!header_) {
    header_ = fields;
    return;
  }
  if (fields.size() == 1 && fields[0].empty()) return;
  if (auto event = event_from_csv(*header_, fields)) {
    sink_(*event);
    ++delivered_;
  } else {
    ++skipped_;
    spdlog::warn("skipping malformed record in {}", path_.string());
  }
}

std::size_t FileTailer::poll_once() {
  std::lock_guard lock(poll_mutex_);
  std::error_code ec;
  auto size = std::filesystem::file_size(path_, ec);
  if (ec) return 0;
  if (size < offset_) {
    offset_ = 0;
    partial_.clear();
    csv_record_.clear();
    header_.reset();
  }
  if (size == offset_) return 0;
  std::ifstream in(path_, std::ios::binary);
  if (!in) return 0;
  in.seekg(static_cast<std::streamoff>(offset_));
  std::string chunk(size - offset_, '\0');
  in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  chunk.resize(static_cast<std::size_t>(in.gcount()));
  offset_ += chunk.size();

  const std::size_t before = delivered_;
  partial_ += chunk;
  std::size_t begin = 0;
  for (auto nl = partial_.find('\n'); nl != std::string::npos; nl = partial_.find('\n', begin)) {
    handle_line(partial_.substr(begin, nl - begin));
    begin = nl + 1;
  }
  partial_.erase(0, begin);
  return delivered_ - before;
}

void FileTailer::start() {
  if (thread_.joinable()) return;
  stopping_ = false;
  thread_ = std::thread([this] {
    std::unique_lock lock(wait_mutex_);
    while (!stopping_) {
      lock.unlock();
      try {
        poll_once();
      } catch (const std::exception& err) {
        spdlog::error("tailing {} failed: {}", path_.string(), err.what());
      }
      lock.lock();
      wake_.wait_for(lock, interval_, [this] { return stopping_; });
    }
  });
}

void FileTailer::stop() {
  {
    std::lock_guard lock(wait_mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

}  // namespace shrec
