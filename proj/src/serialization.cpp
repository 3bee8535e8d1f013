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

#include "shrec/serialization.hpp"

#include <sstream>

#include "shrec/errors.hpp"

namespace shrec {

using nlohmann::json;

namespace {

Timestamp parse_ts(const json& v) {
  auto ts = v.is_string() ? parse_iso8601(v.get<std::string>()) : std::nullopt;
  if (!ts) throw FormatError("bad timestamp " + v.dump());
  return *ts;
}

}  // namespace

void to_json(json& j, const Event& e) {
  j = json{{"ts", format_iso8601(e.timestamp)},
           {"home", e.home_id},
           {"zone", e.zone_id},
           {"zone_name", e.zone_name},
           {"device", e.device_id},
           {"scene", e.scene_id},
           {"source", e.source_id},
           {"group", to_string(e.group)}};
}

void from_json(const json& j, Event& e) {
  auto parsed = parse_event_json(j.dump());
  if (!parsed) throw FormatError("malformed event " + j.dump());
  e = std::move(*parsed);
}

void to_json(json& j, const SymbolTable& table) {
  json entries = json::array();
  for (const auto& info : table.entries()) {
    entries.push_back(json{{"symbol", info.symbol.str()},
                           {"desc", info.desc},
                           {"zone_name", info.zone_name},
                           {"zone", info.zone_id},
                           {"device", info.device_id},
                           {"group", to_string(info.group)},
                           {"scene", info.scene_id}});
  }
  j = json{{"policy", to_string(table.policy())}, {"entries", entries}};
}

SymbolTable symbol_table_from_json(const json& j) {
  auto policy = policy_from_string(j.value("policy", "device"));
  if (!policy) throw FormatError("unknown symbol policy");
  std::string lines;
  for (const auto& entry : j.at("entries")) lines += entry.dump() + '\n';
  std::istringstream in(lines);
  return SymbolTable::read_jsonl(in, *policy);
}

void to_json(json& j, const EmissionPolicy& p) {
  j = json{{"per_rule_cooldown_s", p.per_rule_cooldown.count()},
           {"per_home_daily_cap", p.per_home_daily_cap},
           {"completion_timeout_s", p.completion_timeout.count()},
           {"stale_gap_s", p.stale_gap.count()},
           {"gap_tolerance", p.gap_tolerance},
           {"instance_budget", p.instance_budget},
           {"ordering_tolerance_s", p.ordering_tolerance.count()}};
}

void from_json(const json& j, EmissionPolicy& p) {
  EmissionPolicy d;
  p.per_rule_cooldown = Seconds(j.value("per_rule_cooldown_s", d.per_rule_cooldown.count()));
  p.per_home_daily_cap = j.value("per_home_daily_cap", d.per_home_daily_cap);
  p.completion_timeout = Seconds(j.value("completion_timeout_s", d.completion_timeout.count()));
  p.stale_gap = Seconds(j.value("stale_gap_s", d.stale_gap.count()));
  p.gap_tolerance = j.value("gap_tolerance", d.gap_tolerance);
  p.instance_budget = j.value("instance_budget", d.instance_budget);
  p.ordering_tolerance = Seconds(j.value("ordering_tolerance_s", d.ordering_tolerance.count()));
  p.validate();
}

void to_json(json& j, const Recommendation& r) {
  j = json{{"id", r.id},
           {"rule_id", r.rule_id},
           {"home", r.home_id},
           {"created_at", format_iso8601(r.created_at)},
           {"text", r.text},
           {"status", to_string(r.status)}};
}

void from_json(const json& j, Recommendation& r) {
  r.id = j.at("id").get<std::string>();
  r.rule_id = j.at("rule_id").get<std::string>();
  r.home_id = j.at("home").get<std::string>();
  r.created_at = parse_ts(j.at("created_at"));
  r.text = j.value("text", "");
  auto status = status_from_string(j.value("status", "pending"));
  if (!status) throw FormatError("bad recommendation status " + j.dump());
  r.status = *status;
}

}  // namespace shrec
