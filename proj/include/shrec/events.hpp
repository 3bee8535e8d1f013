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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "shrec/time.hpp"

namespace shrec {

enum class DeviceGroup { lighting, shades, heating, audio, video, security, access, broadcast, unknown };

std::string_view to_string(DeviceGroup group);
/// Unrecognized names map to DeviceGroup::unknown.
DeviceGroup group_from_string(std::string_view name);

/// One timestamped scene activation in a home.
struct Event {
  Timestamp timestamp{};
  std::string home_id;
  std::string zone_id;
  std::string zone_name;
  std::string device_id;
  std::int64_t scene_id = 0;
  std::int64_t source_id = 0;
  DeviceGroup group = DeviceGroup::unknown;

  bool operator==(const Event&) const = default;
};

/// Events of a single home ordered by (timestamp, ingestion order).
struct EventLog {
  std::string home_id;
  std::vector<Event> events;

  bool operator==(const EventLog&) const = default;
};

enum class LogFormat { jsonl, csv };

/// `.csv` selects CSV, anything else JSONL.
LogFormat format_for_path(const std::filesystem::path& path);

struct ParsedLog {
  EventLog log;
  std::size_t skipped = 0;
};

/// Reads a line-oriented event log. Malformed records (bad syntax, missing
/// fields, negative codes, a home id differing from the first record) are
/// skipped and counted. Throws IoError when the stream fails and FormatError
/// when more than half of the records are malformed.
ParsedLog parse_log(std::istream& in, LogFormat format);
ParsedLog parse_log_file(const std::filesystem::path& path, LogFormat format);
ParsedLog parse_log_file(const std::filesystem::path& path);

void write_log(std::ostream& out, const EventLog& log, LogFormat format);

/// Single JSONL record; nullopt when malformed.
std::optional<Event> parse_event_json(std::string_view line);
std::string event_to_json(const Event& event);

/// Splits one CSV record with RFC-4180 quoting. `complete` is false when the
/// record continues on the next physical line (open quote).
std::vector<std::string> split_csv_record(std::string_view record, bool& complete);
/// Maps a CSV record onto an event using the header's column order.
std::optional<Event> event_from_csv(const std::vector<std::string>& header,
                                    const std::vector<std::string>& fields);
std::vector<std::string> csv_header();

/// Chooses which events are mined. Source ids of timers and sensors are
/// listed in `excluded_sources`; everything else counts as user-generated.
struct EventFilter {
  std::set<std::int64_t> excluded_sources;
  bool exclude_broadcast_unknown = false;

  bool accepts(const Event& event) const;
};

EventLog filter_events(const EventLog& log, const EventFilter& filter);

/// Compact token for an event class. Ids start at 1 in order of first
/// appearance; the maximum id is reserved for the wildcard.
struct EventSymbol {
  std::uint32_t id = 0;

  static constexpr EventSymbol wildcard() { return EventSymbol{0xFFFFFFFFu}; }
  constexpr bool is_wildcard() const { return id == 0xFFFFFFFFu; }

  /// "S<id>" or "*".
  std::string str() const;
  static std::optional<EventSymbol> parse(std::string_view text);

  auto operator<=>(const EventSymbol&) const = default;
};

enum class SymbolPolicy {
  device,  // (zone, device, scene)
  group,   // (zone, device group, scene)
};

std::string_view to_string(SymbolPolicy policy);
std::optional<SymbolPolicy> policy_from_string(std::string_view name);

struct SymbolInfo {
  EventSymbol symbol;
  std::string zone_id;
  std::string zone_name;
  std::string device_id;  // empty under SymbolPolicy::group
  DeviceGroup group = DeviceGroup::unknown;
  std::int64_t scene_id = 0;
  std::string desc;

  bool operator==(const SymbolInfo&) const = default;
};

class SymbolTable {
 public:
  explicit SymbolTable(SymbolPolicy policy = SymbolPolicy::device) : policy_(policy) {}

  SymbolPolicy policy() const { return policy_; }

  /// Returns the event's symbol, allocating the next id for unseen classes.
  EventSymbol intern(const Event& event);
  std::optional<EventSymbol> find(const Event& event) const;
  const SymbolInfo* info(EventSymbol symbol) const;
  std::size_t size() const { return infos_.size(); }
  const std::vector<SymbolInfo>& entries() const { return infos_; }

  void write_jsonl(std::ostream& out) const;
  static SymbolTable read_jsonl(std::istream& in, SymbolPolicy policy = SymbolPolicy::device);

  bool operator==(const SymbolTable& other) const {
    return policy_ == other.policy_ && infos_ == other.infos_;
  }

 private:
  using Key = std::tuple<std::string, std::string, std::int64_t>;
  Key key_for(const Event& event) const;

  SymbolPolicy policy_;
  std::map<Key, std::uint32_t> ids_;
  std::vector<SymbolInfo> infos_;  // infos_[id - 1]
};

struct Symbolized {
  std::vector<EventSymbol> symbols;
  std::vector<Timestamp> timestamps;
  SymbolTable table;
};

/// Length-preserving and a pure function of (log, policy).
Symbolized symbolize(const EventLog& log, SymbolPolicy policy = SymbolPolicy::device);

}  // namespace shrec
