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

#include "shrec/engine.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "shrec/errors.hpp"
#include "shrec/serialization.hpp"

namespace shrec {

using nlohmann::json;

namespace {

std::string action_verb(std::int64_t scene) {
  switch (scene) {
    case 0:
      return "Turn off";
    case 67:
      return "Switch to standby";
    case 68:
      return "Switch off completely";
    default:
      return fmt::format("Activate scene {} on", scene);
  }
}

}  // namespace

void EmissionPolicy::validate() const {
  if (per_rule_cooldown.count() <= 0 || per_home_daily_cap == 0 ||
      completion_timeout.count() <= 0 || stale_gap.count() <= 0 || instance_budget == 0 ||
      ordering_tolerance.count() < 0) {
    throw ValidationError("emission policy values must be positive");
  }
}

std::string_view to_string(RecommendationStatus status) {
  switch (status) {
    case RecommendationStatus::pending:
      return "pending";
    case RecommendationStatus::accepted_useful:
      return "accepted_useful";
    case RecommendationStatus::rejected_not_useful:
      return "rejected_not_useful";
    case RecommendationStatus::expired:
      return "expired";
  }
  return "pending";
}

std::optional<RecommendationStatus> status_from_string(std::string_view text) {
  for (auto s : {RecommendationStatus::pending, RecommendationStatus::accepted_useful,
                 RecommendationStatus::rejected_not_useful, RecommendationStatus::expired}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string render_text(EventSymbol consequent, const SymbolTable& symbols, bool* used_fallback) {
  std::string action_desc;
  std::string zone;
  bool fallback = false;
  if (const SymbolInfo* info = symbols.info(consequent)) {
    const std::string& target =
        info->device_id.empty() ? std::string(to_string(info->group)) : info->device_id;
    action_desc = action_verb(info->scene_id) + " " + target;
    zone = info->zone_name;
    if (zone.empty()) {
      zone = info->zone_id;
      fallback = true;
      spdlog::warn("no zone name for {}; using zone id '{}'", consequent.str(), zone);
    }
  } else {
    action_desc = consequent.str();
    zone = consequent.str();
    fallback = true;
    spdlog::warn("symbol {} missing from symbol table", consequent.str());
  }
  if (used_fallback) *used_fallback = fallback;
  return fmt::format("Suggestion: {} in {}? Reply YES if useful, NO if not.", action_desc, zone);
}

std::string render_text(const AssociationRule& rule, const SymbolTable& symbols,
                        bool* used_fallback) {
  return render_text(rule.consequent, symbols, used_fallback);
}

Engine::Engine(std::string home_id, SymbolTable symbols, EmissionPolicy policy)
    : home_id_(std::move(home_id)), symbols_(std::move(symbols)), policy_(policy) {
  policy_.validate();
}

void Engine::set_rules(std::span<const AssociationRule> rules) {
  rules_.clear();
  for (const auto& r : rules) {
    rules_[r.id] = RuleEntry{r.antecedent, r.consequent, r.weight, r.confidence, r.active};
  }
  std::erase_if(instances_, [&](const MatcherInstance& m) { return !rules_.count(m.rule_id); });
  rebuild_index();
}

void Engine::update_rule(const AssociationRule& rule) {
  auto it = rules_.find(rule.id);
  if (it == rules_.end()) throw NotFoundError("engine has no rule " + rule.id);
  it->second.weight = rule.weight;
  it->second.confidence = rule.confidence;
  it->second.active = rule.active;
  rebuild_index();
}

void Engine::rebuild_index() {
  by_first_symbol_.clear();
  for (const auto& [id, rule] : rules_) {
    if (rule.active) by_first_symbol_[rule.antecedent.front()].push_back(id);
  }
}

std::vector<Recommendation> Engine::step(const Event& event) {
  if (!event.home_id.empty() && event.home_id != home_id_) {
    throw ValidationError("event for home " + event.home_id + " sent to " + home_id_);
  }
  if (last_ts_ && event.timestamp + policy_.ordering_tolerance < *last_ts_) {
    throw OrderingError("event at " + format_iso8601(event.timestamp) + " precedes " +
                        format_iso8601(*last_ts_));
  }
  return step(symbols_.intern(event), event.timestamp);
}

std::vector<Recommendation> Engine::step(EventSymbol symbol, Timestamp ts) {
  if (last_ts_ && ts + policy_.ordering_tolerance < *last_ts_) {
    throw OrderingError("event at " + format_iso8601(ts) + " precedes " +
                        format_iso8601(*last_ts_));
  }
  std::vector<Recommendation> out = expire(ts);

  // Matchers completed by the previous event learn whether the action followed.
  std::vector<std::string> candidates;
  std::erase_if(instances_, [&](const MatcherInstance& m) {
    if (!m.completed_at) return false;
    auto it = rules_.find(m.rule_id);
    if (it != rules_.end() && it->second.consequent != symbol) candidates.push_back(m.rule_id);
    return true;
  });
  if (auto rec = emit_best(std::move(candidates), ts)) out.push_back(std::move(*rec));

  std::erase_if(instances_, [&](MatcherInstance& m) {
    auto it = rules_.find(m.rule_id);
    if (it == rules_.end() || !it->second.active) return true;
    const auto& antecedent = it->second.antecedent;
    if (antecedent[m.position] == symbol) {
      ++m.position;
      m.last_advance = ts;
      if (m.position == antecedent.size()) m.completed_at = ts;
      return false;
    }
    if (m.skipped < policy_.gap_tolerance) {
      ++m.skipped;
      return false;
    }
    return true;
  });

  if (auto it = by_first_symbol_.find(symbol); it != by_first_symbol_.end()) {
    for (const auto& id : it->second) {
      MatcherInstance m;
      m.rule_id = id;
      m.position = 1;
      m.anchor_time = ts;
      m.last_advance = ts;
      if (rules_.find(id)->second.antecedent.size() == 1) m.completed_at = ts;
      instances_.push_back(std::move(m));
    }
  }
  if (instances_.size() > policy_.instance_budget) {
    instances_.erase(instances_.begin(),
                     instances_.begin() +
                         static_cast<std::ptrdiff_t>(instances_.size() - policy_.instance_budget));
  }
  last_ts_ = std::max(last_ts_.value_or(ts), ts);
  return out;
}

std::vector<Recommendation> Engine::on_timeout(Timestamp now) { return expire(now); }

std::vector<Recommendation> Engine::expire(Timestamp now) {
  std::vector<Recommendation> out;
  // All waiting matchers completed on the same event, so they share a deadline.
  std::optional<Timestamp> completed;
  std::vector<std::string> candidates;
  std::erase_if(instances_, [&](const MatcherInstance& m) {
    if (m.completed_at) {
      if (now - *m.completed_at < policy_.completion_timeout) return false;
      completed = completed ? std::min(*completed, *m.completed_at) : *m.completed_at;
      candidates.push_back(m.rule_id);
      return true;
    }
    return now - m.last_advance >= policy_.stale_gap;
  });
  if (completed) {
    if (auto rec = emit_best(std::move(candidates), *completed + policy_.completion_timeout)) {
      out.push_back(std::move(*rec));
    }
  }
  return out;
}

bool Engine::permitted(const std::string& rule_id, Timestamp at) const {
  auto it = rules_.find(rule_id);
  if (it == rules_.end() || !it->second.active) return false;
  if (cap_day_ && *cap_day_ == day_floor(at) && cap_day_count_ >= policy_.per_home_daily_cap) {
    return false;
  }
  auto last = last_emitted_.find(rule_id);
  return last == last_emitted_.end() || at - last->second >= policy_.per_rule_cooldown;
}

std::optional<Recommendation> Engine::emit_best(std::vector<std::string> candidates,
                                                Timestamp at) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const RuleEntry* best = nullptr;
  const std::string* best_id = nullptr;
  for (const auto& id : candidates) {
    if (!permitted(id, at)) continue;
    const RuleEntry& r = rules_.find(id)->second;
    // Candidates are id-sorted, so strict comparisons keep the smaller id on ties.
    if (!best || r.weight > best->weight ||
        (r.weight == best->weight && r.confidence > best->confidence)) {
      best = &r;
      best_id = &id;
    }
  }
  if (!best) return std::nullopt;

  Recommendation rec;
  rec.id = fmt::format("{}-{:06}", home_id_, next_recommendation_++);
  rec.rule_id = *best_id;
  rec.home_id = home_id_;
  rec.created_at = at;
  rec.text = render_text(best->consequent, symbols_);
  last_emitted_[*best_id] = at;
  if (!cap_day_ || *cap_day_ != day_floor(at)) {
    cap_day_ = day_floor(at);
    cap_day_count_ = 0;
  }
  ++cap_day_count_;
  return rec;
}

json Engine::state_json() const {
  json rules = json::object();
  for (const auto& [id, r] : rules_) {
    json antecedent = json::array();
    for (auto s : r.antecedent) antecedent.push_back(s.str());
    rules[id] = json{{"antecedent", antecedent},
                     {"consequent", r.consequent.str()},
                     {"weight", r.weight},
                     {"confidence", r.confidence},
                     {"active", r.active}};
  }
  json instances = json::array();
  for (const auto& m : instances_) {
    instances.push_back(json{
        {"rule", m.rule_id},
        {"position", m.position},
        {"skipped", m.skipped},
        {"anchor", format_iso8601(m.anchor_time)},
        {"last_advance", format_iso8601(m.last_advance)},
        {"completed_at", m.completed_at ? json(format_iso8601(*m.completed_at)) : json(nullptr)}});
  }
  json last_emitted = json::object();
  for (const auto& [id, ts] : last_emitted_) last_emitted[id] = format_iso8601(ts);
  return json{{"home", home_id_},
              {"symbols", json(symbols_)},
              {"policy", json(policy_)},
              {"rules", rules},
              {"instances", instances},
              {"last_emitted", last_emitted},
              {"cap_day", cap_day_ ? json(format_iso8601(*cap_day_)) : json(nullptr)},
              {"cap_day_count", cap_day_count_},
              {"next_recommendation", next_recommendation_},
              {"last_ts", last_ts_ ? json(format_iso8601(*last_ts_)) : json(nullptr)}};
}

Engine Engine::from_state_json(const json& j) {
  auto ts = [](const json& v) -> Timestamp {
    auto parsed = parse_iso8601(v.get<std::string>());
    if (!parsed) throw FormatError("bad timestamp in engine state: " + v.dump());
    return *parsed;
  };
  auto symbol = [](const json& v) {
    auto s = EventSymbol::parse(v.get<std::string>());
    if (!s) throw FormatError("bad symbol in engine state: " + v.dump());
    return *s;
  };
  Engine engine(j.at("home").get<std::string>(), symbol_table_from_json(j.at("symbols")),
                j.at("policy").get<EmissionPolicy>());
  for (const auto& [id, r] : j.at("rules").items()) {
    RuleEntry entry;
    for (const auto& s : r.at("antecedent")) entry.antecedent.push_back(symbol(s));
    entry.consequent = symbol(r.at("consequent"));
    entry.weight = r.at("weight").get<double>();
    entry.confidence = r.at("confidence").get<double>();
    entry.active = r.at("active").get<bool>();
    engine.rules_.emplace(id, std::move(entry));
  }
  engine.rebuild_index();
  for (const auto& m : j.at("instances")) {
    MatcherInstance inst;
    inst.rule_id = m.at("rule").get<std::string>();
    inst.position = m.at("position").get<std::size_t>();
    inst.skipped = m.at("skipped").get<std::size_t>();
    inst.anchor_time = ts(m.at("anchor"));
    inst.last_advance = ts(m.at("last_advance"));
    if (!m.at("completed_at").is_null()) inst.completed_at = ts(m.at("completed_at"));
    engine.instances_.push_back(std::move(inst));
  }
  for (const auto& [id, t] : j.at("last_emitted").items()) engine.last_emitted_[id] = ts(t);
  if (!j.at("cap_day").is_null()) engine.cap_day_ = ts(j.at("cap_day"));
  engine.cap_day_count_ = j.at("cap_day_count").get<std::size_t>();
  engine.next_recommendation_ = j.at("next_recommendation").get<std::uint64_t>();
  if (!j.at("last_ts").is_null()) engine.last_ts_ = ts(j.at("last_ts"));
  return engine;
}

}  // namespace shrec
