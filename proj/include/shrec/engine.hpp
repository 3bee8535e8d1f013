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

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shrec/events.hpp"
#include "shrec/rules.hpp"
#include "shrec/time.hpp"

namespace shrec {

struct EmissionPolicy {
  Seconds per_rule_cooldown{std::chrono::hours(6)};
  std::size_t per_home_daily_cap = 3;
  Seconds completion_timeout{std::chrono::minutes(5)};
  Seconds stale_gap{std::chrono::minutes(30)};  // partial matches die after this much silence
  std::size_t gap_tolerance = 0;                // non-matching events a partial match survives
  std::size_t instance_budget = 10000;          // per home, oldest evicted first
  Seconds ordering_tolerance{0};

  /// Throws ValidationError.
  void validate() const;
  bool operator==(const EmissionPolicy&) const = default;
};

enum class RecommendationStatus { pending, accepted_useful, rejected_not_useful, expired };
std::string_view to_string(RecommendationStatus status);
std::optional<RecommendationStatus> status_from_string(std::string_view text);

struct Recommendation {
  std::string id;
  std::string rule_id;
  std::string home_id;
  Timestamp created_at{};
  std::string text;
  RecommendationStatus status = RecommendationStatus::pending;

  bool operator==(const Recommendation&) const = default;
};

/// One in-flight automaton tracking a rule antecedent.
struct MatcherInstance {
  std::string rule_id;
  std::size_t position = 0;  // next antecedent index expected
  std::size_t skipped = 0;   // tolerated mismatches so far
  Timestamp anchor_time{};
  Timestamp last_advance{};
  std::optional<Timestamp> completed_at;  // antecedent fully matched

  bool operator==(const MatcherInstance&) const = default;
};

/// Builds the recommendation text for a rule's action. Falls back to the raw
/// symbol or zone id (and logs a warning) when the table lacks the entry or
/// the zone has no display name.
std::string render_text(EventSymbol consequent, const SymbolTable& symbols,
                        bool* used_fallback = nullptr);
std::string render_text(const AssociationRule& rule, const SymbolTable& symbols,
                        bool* used_fallback = nullptr);

/// Streaming recommender for one home. Every event spawns a matcher per rule
/// whose antecedent starts with it; matchers advance on the exact next
/// symbol and die otherwise. A matcher whose antecedent is complete looks at
/// the following event: the rule's action means the inhabitant already
/// acted, anything else (or completion_timeout of silence) yields a
/// recommendation. At most one recommendation per event: the permitted rule
/// with the highest weight wins, then higher confidence, then smaller id.
/// Time only moves through event timestamps and on_timeout().
class Engine {
 public:
  Engine(std::string home_id, SymbolTable symbols, EmissionPolicy policy = {});

  /// Replaces the rule set. Existing matchers of removed rules are dropped.
  void set_rules(std::span<const AssociationRule> rules);
  /// Refreshes weight, confidence and active flag of a known rule.
  void update_rule(const AssociationRule& rule);

  /// Throws OrderingError when `event` is older than the stream position.
  std::vector<Recommendation> step(const Event& event);
  std::vector<Recommendation> step(EventSymbol symbol, Timestamp ts);
  std::vector<Recommendation> on_timeout(Timestamp now);

  const std::string& home_id() const { return home_id_; }
  const std::vector<MatcherInstance>& instances() const { return instances_; }
  const SymbolTable& symbols() const { return symbols_; }
  const EmissionPolicy& policy() const { return policy_; }
  std::optional<Timestamp> last_event_time() const { return last_ts_; }

  nlohmann::json state_json() const;
  static Engine from_state_json(const nlohmann::json& j);

 private:
  struct RuleEntry {
    std::vector<EventSymbol> antecedent;
    EventSymbol consequent;
    double weight = 0.0;
    double confidence = 0.0;
    bool active = true;
  };

  std::vector<Recommendation> expire(Timestamp now);
  std::optional<Recommendation> emit_best(std::vector<std::string> candidates, Timestamp at);
  bool permitted(const std::string& rule_id, Timestamp at) const;
  void rebuild_index();

  std::string home_id_;
  SymbolTable symbols_;
  EmissionPolicy policy_;
  std::map<std::string, RuleEntry, std::less<>> rules_;
  std::map<EventSymbol, std::vector<std::string>> by_first_symbol_;
  std::vector<MatcherInstance> instances_;  // creation order
  std::map<std::string, Timestamp, std::less<>> last_emitted_;
  std::optional<Timestamp> cap_day_;
  std::size_t cap_day_count_ = 0;
  std::uint64_t next_recommendation_ = 1;
  std::optional<Timestamp> last_ts_;
};

}  // namespace shrec
