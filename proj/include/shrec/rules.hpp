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
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shrec/events.hpp"
#include "shrec/regression.hpp"
#include "shrec/wsdd.hpp"

namespace shrec {

/// Energy-lowering action predicate over a home's symbol alphabet.
class ActionSet {
 public:
  ActionSet() = default;
  explicit ActionSet(std::vector<bool> flags) : flags_(std::move(flags)) {}
  static ActionSet of(std::initializer_list<EventSymbol> symbols);

  /// False for wildcards and symbols outside the alphabet.
  bool contains(EventSymbol symbol) const {
    return !symbol.is_wildcard() && symbol.id < flags_.size() && flags_[symbol.id];
  }

 private:
  std::vector<bool> flags_;  // indexed by symbol id
};

/// Scene ids that lower energy use, per device group. Loaded from JSON
/// (`{"actions": {"lighting": [0, 422]}}`) or TOML (`actions = {lighting =
/// [0, 422]}` or an `[actions]` table).
class ActionCatalog {
 public:
  /// Off (0) and standby (67) for lighting, audio and heating.
  static ActionCatalog defaults();
  /// Throws FormatError.
  static ActionCatalog parse(std::string_view text);
  static ActionCatalog load(const std::filesystem::path& path);

  void add(DeviceGroup group, std::int64_t scene) { scenes_[group].insert(scene); }
  bool is_action(DeviceGroup group, std::int64_t scene) const;
  ActionSet bind(const SymbolTable& table) const;
  const std::map<DeviceGroup, std::set<std::int64_t>>& scenes() const { return scenes_; }

 private:
  std::map<DeviceGroup, std::set<std::int64_t>> scenes_;
};

enum class Vote { useful, not_useful };
std::string_view to_string(Vote vote);
std::optional<Vote> vote_from_string(std::string_view text);

enum class Deactivation { none, negative_streak, low_usefulness, admin };
std::string_view to_string(Deactivation reason);
Deactivation deactivation_from_string(std::string_view text);

/// X -> Y: a run of normal events followed by one energy-lowering action.
struct AssociationRule {
  std::string id;
  std::string home_id;
  std::vector<EventSymbol> antecedent;
  EventSymbol consequent;
  std::size_t support_count = 0;     // occurrences of X.Y
  double relative_support = 0.0;     // of X.Y, window normalized
  std::size_t antecedent_count = 0;  // occurrences of X
  double confidence = 0.0;
  std::size_t pattern_length = 0;    // |X| + 1
  std::size_t action_position = 0;   // 1-based index of Y in the mined pattern
  double weight = 0.0;
  bool active = true;
  Deactivation deactivation = Deactivation::none;
  std::size_t negative_streak = 0;
  std::vector<Vote> feedback_log;

  RuleFeatures features() const;
  bool operator==(const AssociationRule&) const = default;
};

/// "S1-S2>S5".
std::string rule_id_for(std::span<const EventSymbol> antecedent, EventSymbol consequent);

enum class SuffixPolicy {
  discard,            // split at the first action, drop what follows
  action_final_only,  // keep only patterns whose first action is the last symbol
};

/// Distinct start positions of contiguous matches of `pattern` in `seq`.
std::size_t count_occurrences(std::span<const EventSymbol> seq,
                              std::span<const EventSymbol> pattern);

/// Keeps wildcard-free patterns holding an action preceded by at least one
/// normal event.
std::vector<Pattern> filter_relevant(std::span<const Pattern> patterns, const ActionSet& actions,
                                     SuffixPolicy policy = SuffixPolicy::discard);

/// Splits at the first action. Confidence is count(X.Y) / count(X) over
/// `context`, the sequence the pattern was mined from. The initial weight
/// is usefulness_coefficient() under `model`. Throws ValidationError when
/// there is no (X, Y) split.
AssociationRule extract_rule(const Pattern& pattern, const ActionSet& actions,
                             std::span<const EventSymbol> context,
                             const RegressionModel& model = RegressionModel::unit_defaults(),
                             std::string_view home_id = {});

/// filter_relevant + extract_rule, one rule per distinct (X, Y), id order.
std::vector<AssociationRule> extract_rules(std::span<const Pattern> patterns,
                                           const ActionSet& actions,
                                           std::span<const EventSymbol> context,
                                           const RegressionModel& model =
                                               RegressionModel::unit_defaults(),
                                           SuffixPolicy policy = SuffixPolicy::discard,
                                           std::string_view home_id = {});

/// beta_confidence * confidence + beta_length * pattern_length.
double usefulness_coefficient(const AssociationRule& rule, const RegressionModel& model);

/// Share of rules excluded by the usefulness threshold unless configured.
inline constexpr double kDefaultExclusionFraction = 19.0 / 54.0;

/// The coefficient below which `fraction` of the rules fall.
double exclusion_threshold(std::span<const AssociationRule> rules, const RegressionModel& model,
                           double fraction);

/// Re-derives every weight from `model` and deactivates active rules whose
/// coefficient is below `threshold`. Returns the number deactivated.
std::size_t apply_usefulness_threshold(std::span<AssociationRule> rules,
                                       const RegressionModel& model, double threshold);

inline constexpr std::size_t kDefaultRetirementThreshold = 10;

/// Useful resets the negative streak, not useful extends it; reaching
/// `retirement_threshold` retires the rule for good.
void apply_feedback(AssociationRule& rule, Vote vote,
                    std::size_t retirement_threshold = kDefaultRetirementThreshold);

/// Mean of +1 (useful) / -1 (not useful); nullopt without feedback.
std::optional<double> feedback_score(const AssociationRule& rule);

/// Regression over the rules that received at least one vote.
RegressionModel fit_feedback_regression(std::span<const AssociationRule> rules,
                                        double alpha = 0.05);

/// A home's rules keyed by id.
class RuleSet {
 public:
  explicit RuleSet(std::size_t retirement_threshold = kDefaultRetirementThreshold)
      : retirement_threshold_(retirement_threshold) {}

  void insert(AssociationRule rule);
  const AssociationRule* find(std::string_view id) const;
  /// Throws NotFoundError.
  const AssociationRule& apply_feedback(std::string_view id, Vote vote);
  /// Reactivates a retired or deactivated rule. Throws NotFoundError.
  const AssociationRule& admin_reset(std::string_view id);

  std::vector<AssociationRule> rules() const;
  std::size_t size() const { return rules_.size(); }
  std::size_t retirement_threshold() const { return retirement_threshold_; }

  bool operator==(const RuleSet&) const = default;

 private:
  AssociationRule& at(std::string_view id);

  std::size_t retirement_threshold_;
  std::map<std::string, AssociationRule, std::less<>> rules_;
};

void write_rules_jsonl(std::ostream& out, std::span<const AssociationRule> rules);
std::vector<AssociationRule> read_rules_jsonl(std::istream& in);

}  // namespace shrec
