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

#include "shrec/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "shrec/errors.hpp"

namespace shrec {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<DeviceGroup, std::string_view>, 9> kGroupNames{{
    {DeviceGroup::lighting, "lighting"},
    {DeviceGroup::shades, "shades"},
    {DeviceGroup::heating, "heating"},
    {DeviceGroup::audio, "audio"},
    {DeviceGroup::video, "video"},
    {DeviceGroup::security, "security"},
    {DeviceGroup::access, "access"},
    {DeviceGroup::broadcast, "broadcast"},
    {DeviceGroup::unknown, "unknown"},
}};

const std::vector<std::string> kCsvColumns{"ts",     "home",   "zone",  "zone_name",
                                           "device", "scene",  "source", "group"};

std::optional<std::int64_t> parse_code(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0) return std::nullopt;
  return value;
}

std::optional<std::int64_t> json_code(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) return std::nullopt;
  auto value = it->get<std::int64_t>();
  if (value < 0) return std::nullopt;
  return value;
}

std::optional<std::string> json_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void finish(ParsedLog& parsed, std::size_t records) {
  if (records > 0 && parsed.skipped * 2 > records) {
    throw FormatError("more than half of " + std::to_string(records) +
                      " records are malformed; wrong format selected?");
  }
  std::stable_sort(parsed.log.events.begin(), parsed.log.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
}

// Appends the event unless it belongs to another home.
void accept(ParsedLog& parsed, std::optional<Event> event) {
  if (!event) {
    ++parsed.skipped;
    return;
  }
  if (parsed.log.events.empty() && parsed.log.home_id.empty()) {
    parsed.log.home_id = event->home_id;
  } else if (event->home_id != parsed.log.home_id) {
    ++parsed.skipped;
    return;
  }
  parsed.log.events.push_back(std::move(*event));
}

ParsedLog parse_jsonl(std::istream& in) {
  ParsedLog parsed;
  std::size_t records = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++records;
    accept(parsed, parse_event_json(line));
  }
  if (in.bad()) throw IoError("failed reading event stream");
  finish(parsed, records);
  return parsed;
}

ParsedLog parse_csv(std::istream& in) {
  ParsedLog parsed;
  std::optional<std::vector<std::string>> header;
  std::size_t records = 0;
  std::string line, record;
  while (std::getline(in, line)) {
    if (record.empty() && is_blank(line)) continue;
    record += line;
    bool complete = true;
    auto fields = split_csv_record(record, complete);
    if (!complete) {
      record += '\n';
      continue;
    }
    record.clear();
    if (!header) {
      for (const auto& column : kCsvColumns) {
        if (std::find(fields.begin(), fields.end(), column) == fields.end()) {
          throw FormatError("CSV header is missing column '" + column + "'");
        }
      }
      header = std::move(fields);
      continue;
    }
    ++records;
    accept(parsed, event_from_csv(*header, fields));
  }
  if (in.bad()) throw IoError("failed reading event stream");
  if (!record.empty()) {
    ++records;
    ++parsed.skipped;  // unterminated quote
  }
  finish(parsed, records);
  return parsed;
}

}  // namespace

std::string_view to_string(DeviceGroup group) {
  for (const auto& [g, name] : kGroupNames) {
    if (g == group) return name;
  }
  return "unknown";
}

DeviceGroup group_from_string(std::string_view name) {
  for (const auto& [g, n] : kGroupNames) {
    if (n == name) return g;
  }
  return DeviceGroup::unknown;
}

LogFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? LogFormat::csv : LogFormat::jsonl;
}

std::optional<Event> parse_event_json(std::string_view line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
  auto ts_text = json_string(obj, "ts");
  auto home = json_string(obj, "home");
  auto zone = json_string(obj, "zone");
  auto device = json_string(obj, "device");
  auto scene = json_code(obj, "scene");
  auto source = json_code(obj, "source");
  if (!ts_text || !home || !zone || !device || !scene || !source) return std::nullopt;
  auto ts = parse_iso8601(*ts_text);
  if (!ts) return std::nullopt;

  Event event;
  event.timestamp = *ts;
  event.home_id = std::move(*home);
  event.zone_id = std::move(*zone);
  event.zone_name = json_string(obj, "zone_name").value_or("");
  event.device_id = std::move(*device);
  event.scene_id = *scene;
  event.source_id = *source;
  event.group = group_from_string(json_string(obj, "group").value_or("unknown"));
  return event;
}

std::string event_to_json(const Event& event) {
  // Key order is part of the file format.
  nlohmann::ordered_json obj;
  obj["ts"] = format_iso8601(event.timestamp);
  obj["home"] = event.home_id;
  obj["zone"] = event.zone_id;
  obj["zone_name"] = event.zone_name;
  obj["device"] = event.device_id;
  obj["scene"] = event.scene_id;
  obj["source"] = event.source_id;
  obj["group"] = to_string(event.group);
  return obj.dump();
}

std::vector<std::string> split_csv_record(std::string_view record, bool& complete) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < record.size(); ++i) {
    char c = record[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < record.size() && record[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  complete = !quoted;
  return fields;
}

std::vector<std::string> csv_header() { return kCsvColumns; }

std::optional<Event> event_from_csv(const std::vector<std::string>& header,
                                    const std::vector<std::string>& fields) {
  if (fields.size() != header.size()) return std::nullopt;
  auto column = [&](std::string_view name) -> const std::string& {
    auto it = std::find(header.begin(), header.end(), name);
    return fields[static_cast<std::size_t>(it - header.begin())];
  };
  auto ts = parse_iso8601(column("ts"));
  auto scene = parse_code(column("scene"));
  auto source = parse_code(column("source"));
  if (!ts || !scene || !source || column("home").empty()) return std::nullopt;

  Event event;
  event.timestamp = *ts;
  event.home_id = column("home");
  event.zone_id = column("zone");
  event.zone_name = column("zone_name");
  event.device_id = column("device");
  event.scene_id = *scene;
  event.source_id = *source;
  event.group = group_from_string(column("group"));
  return event;
}

ParsedLog parse_log(std::istream& in, LogFormat format) {
  if (!in) throw IoError("event stream is not readable");
  return format == LogFormat::csv ? parse_csv(in) : parse_jsonl(in);
}

ParsedLog parse_log_file(const std::filesystem::path& path, LogFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open event log " + path.string());
  return parse_log(in, format);
}

ParsedLog parse_log_file(const std::filesystem::path& path) {
  return parse_log_file(path, format_for_path(path));
}

void write_log(std::ostream& out, const EventLog& log, LogFormat format) {
  if (format == LogFormat::jsonl) {
    for (const auto& event : log.events) out << event_to_json(event) << '\n';
    return;
  }
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kCsvColumns[i];
  }
  out << "\r\n";
  for (const auto& e : log.events) {
    out << format_iso8601(e.timestamp) << ',' << csv_escape(e.home_id) << ','
        << csv_escape(e.zone_id) << ',' << csv_escape(e.zone_name) << ','
        << csv_escape(e.device_id) << ',' << e.scene_id << ',' << e.source_id << ','
        << to_string(e.group) << "\r\n";
  }
}

bool EventFilter::accepts(const Event& event) const {
  if (excluded_sources.count(event.source_id)) return false;
  if (exclude_broadcast_unknown &&
      (event.group == DeviceGroup::broadcast || event.group == DeviceGroup::unknown)) {
    return false;
  }
  return true;
}

EventLog filter_events(const EventLog& log, const EventFilter& filter) {
  EventLog out{log.home_id, {}};
  std::copy_if(log.events.begin(), log.events.end(), std::back_inserter(out.events),
               [&](const Event& e) { return filter.accepts(e); });
  return out;
}

std::string EventSymbol::str() const {
  return is_wildcard() ? std::string("*") : "S" + std::to_string(id);
}

std::optional<EventSymbol> EventSymbol::parse(std::string_view text) {
  if (text == "*") return wildcard();
  if (text.size() < 2 || text[0] != 'S') return std::nullopt;
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), id);
  if (ec != std::errc{} || ptr != text.data() + text.size() || id == 0 ||
      id == wildcard().id) {
    return std::nullopt;
  }
  return EventSymbol{id};
}

std::string_view to_string(SymbolPolicy policy) {
  return policy == SymbolPolicy::device ? "device" : "group";
}

std::optional<SymbolPolicy> policy_from_string(std::string_view name) {
  if (name == "device") return SymbolPolicy::device;
  if (name == "group") return SymbolPolicy::group;
  return std::nullopt;
}

SymbolTable::Key SymbolTable::key_for(const Event& event) const {
  if (policy_ == SymbolPolicy::device) return {event.zone_id, event.device_id, event.scene_id};
  return {event.zone_id, std::string(to_string(event.group)), event.scene_id};
}

EventSymbol SymbolTable::intern(const Event& event) {
  auto [it, inserted] = ids_.try_emplace(key_for(event), static_cast<std::uint32_t>(infos_.size() + 1));
  if (inserted) {
    SymbolInfo info;
    info.symbol = EventSymbol{it->second};
    info.zone_id = event.zone_id;
    info.zone_name = event.zone_name;
    info.device_id = policy_ == SymbolPolicy::device ? event.device_id : std::string();
    info.group = event.group;
    info.scene_id = event.scene_id;
    const std::string& room = event.zone_name.empty() ? event.zone_id : event.zone_name;
    const std::string what =
        policy_ == SymbolPolicy::device ? event.device_id : std::string(to_string(event.group));
    info.desc = room + " / " + what + " / scene " + std::to_string(event.scene_id);
    infos_.push_back(std::move(info));
  }
  return EventSymbol{it->second};
}

std::optional<EventSymbol> SymbolTable::find(const Event& event) const {
  auto it = ids_.find(key_for(event));
  if (it == ids_.end()) return std::nullopt;
  return EventSymbol{it->second};
}

const SymbolInfo* SymbolTable::info(EventSymbol symbol) const {
  if (symbol.id == 0 || symbol.id > infos_.size()) return nullptr;
  return &infos_[symbol.id - 1];
}

void SymbolTable::write_jsonl(std::ostream& out) const {
  for (const auto& info : infos_) {
    nlohmann::ordered_json obj;
    obj["symbol"] = info.symbol.str();
    obj["desc"] = info.desc;
    obj["zone_name"] = info.zone_name;
    obj["zone"] = info.zone_id;
    obj["device"] = info.device_id;
    obj["group"] = to_string(info.group);
    obj["scene"] = info.scene_id;
    out << obj.dump() << '\n';
  }
}

SymbolTable SymbolTable::read_jsonl(std::istream& in, SymbolPolicy policy) {
  SymbolTable table(policy);
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw FormatError("bad symbol table line: " + line);
    auto symbol = EventSymbol::parse(obj.value("symbol", ""));
    if (!symbol || symbol->id != table.infos_.size() + 1) {
      throw FormatError("symbol table ids must be dense and ordered: " + line);
    }
    SymbolInfo info;
    info.symbol = *symbol;
    info.desc = obj.value("desc", "");
    info.zone_name = obj.value("zone_name", "");
    info.zone_id = obj.value("zone", "");
    info.device_id = obj.value("device", "");
    info.group = group_from_string(obj.value("group", "unknown"));
    info.scene_id = obj.value("scene", std::int64_t{0});
    Key key = policy == SymbolPolicy::device
                  ? Key{info.zone_id, info.device_id, info.scene_id}
                  : Key{info.zone_id, std::string(to_string(info.group)), info.scene_id};
    table.ids_.emplace(std::move(key), symbol->id);
    table.infos_.push_back(std::move(info));
  }
  return table;
}

Symbolized symbolize(const EventLog& log, SymbolPolicy policy) {
  Symbolized out{{}, {}, SymbolTable(policy)};
  out.symbols.reserve(log.events.size());
  out.timestamps.reserve(log.events.size());
  for (const auto& event : log.events) {
    out.symbols.push_back(out.table.intern(event));
    out.timestamps.push_back(event.timestamp);
  }
  return out;
}

}  // namespace shrec
