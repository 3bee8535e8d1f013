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

#include "shrec/rules.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include "shrec/errors.hpp"
#include "shrec/serialization.hpp"

namespace shrec {

using nlohmann::json;

namespace {

void add_scene_list(ActionCatalog& catalog, const std::string& group_name, const json& list) {
  DeviceGroup group = group_from_string(group_name);
  if (group == DeviceGroup::unknown && group_name != "unknown") {
    throw FormatError("unknown device group in action catalog: " + group_name);
  }
  if (!list.is_array()) throw FormatError("scene list for " + group_name + " must be an array");
  for (const auto& scene : list) {
    if (!scene.is_number_integer() || scene.get<std::int64_t>() < 0) {
      throw FormatError("scene ids must be non-negative integers");
    }
    catalog.add(group, scene.get<std::int64_t>());
  }
}

ActionCatalog parse_toml(std::string_view text) {
  std::string body;
  std::istringstream in{std::string(text)};
  std::string line;
  bool in_table = false;
  bool found = false;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '[' && line.find('=') == std::string::npos) {
      in_table = line.find("[actions]") != std::string::npos;
      found = found || in_table;
      continue;
    }
    if (in_table) {
      body += line + '\n';
    } else if (std::regex_search(line, std::regex(R"(^\s*actions\s*=)"))) {
      found = true;
      body += line.substr(line.find('=') + 1) + '\n';
    } else if (!body.empty() && found && body.find('}') == std::string::npos) {
      body += line + '\n';  // inline table spanning lines
    }
  }
  if (!found) throw FormatError("action catalog has no 'actions' entry");

  ActionCatalog catalog;
  static const std::regex entry(R"(([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\[([^\]]*)\])");
  for (std::sregex_iterator it(body.begin(), body.end(), entry), end; it != end; ++it) {
    json list = json::parse("[" + (*it)[2].str() + "]", nullptr, false);
    if (list.is_discarded()) throw FormatError("bad scene list: " + (*it)[0].str());
    add_scene_list(catalog, (*it)[1].str(), list);
  }
  return catalog;
}

bool first_action(const Pattern& pattern, const ActionSet& actions, std::size_t& index) {
  for (std::size_t i = 0; i < pattern.symbols.size(); ++i) {
    if (actions.contains(pattern.symbols[i])) {
      index = i;
      return true;
    }
  }
  return false;
}

}  // namespace

ActionSet ActionSet::of(std::initializer_list<EventSymbol> symbols) {
  std::vector<bool> flags;
  for (auto s : symbols) {
    if (s.is_wildcard()) continue;
    if (flags.size() <= s.id) flags.resize(s.id + 1, false);
    flags[s.id] = true;
  }
  return ActionSet(std::move(flags));
}

ActionCatalog ActionCatalog::defaults() {
  ActionCatalog catalog;
  for (auto group : {DeviceGroup::lighting, DeviceGroup::audio, DeviceGroup::heating}) {
    catalog.add(group, 0);
    catalog.add(group, 67);
  }
  return catalog;
}

ActionCatalog ActionCatalog::parse(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw FormatError("empty action catalog");
  if (text[first] != '{') return parse_toml(text);

  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw FormatError("action catalog is not valid JSON");
  const json& table = doc.contains("actions") ? doc["actions"] : doc;
  if (!table.is_object()) throw FormatError("'actions' must be an object");
  ActionCatalog catalog;
  for (const auto& [group, list] : table.items()) add_scene_list(catalog, group, list);
  return catalog;
}

ActionCatalog ActionCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open action catalog " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool ActionCatalog::is_action(DeviceGroup group, std::int64_t scene) const {
  auto it = scenes_.find(group);
  return it != scenes_.end() && it->second.count(scene) > 0;
}

ActionSet ActionCatalog::bind(const SymbolTable& table) const {
  std::vector<bool> flags(table.size() + 1, false);
  for (const auto& info : table.entries()) flags[info.symbol.id] = is_action(info.group, info.scene_id);
  return ActionSet(std::move(flags));
}

std::string_view to_string(Vote vote) { return vote == Vote::useful ? "useful" : "not_useful"; }

std::optional<Vote> vote_from_string(std::string_view text) {
  if (text == "useful") return Vote::useful;
  if (text == "not_useful") return Vote::not_useful;
  return std::nullopt;
}

std::string_view to_string(Deactivation reason) {
  switch (reason) {
    case Deactivation::none:
      return "none";
    case Deactivation::negative_streak:
      return "negative_streak";
    case Deactivation::low_usefulness:
      return "low_usefulness";
    case Deactivation::admin:
      return "admin";
  }
  return "none";
}

Deactivation deactivation_from_string(std::string_view text) {
  for (auto r : {Deactivation::negative_streak, Deactivation::low_usefulness, Deactivation::admin}) {
    if (to_string(r) == text) return r;
  }
  return Deactivation::none;
}

RuleFeatures AssociationRule::features() const {
  return RuleFeatures{confidence, static_cast<double>(pattern_length), relative_support,
                      static_cast<double>(action_position)};
}

std::string rule_id_for(std::span<const EventSymbol> antecedent, EventSymbol consequent) {
  std::string id;
  for (std::size_t i = 0; i < antecedent.size(); ++i) {
    if (i) id += '-';
    id += antecedent[i].str();
  }
  return id + '>' + consequent.str();
}

std::size_t count_occurrences(std::span<const EventSymbol> seq,
                              std::span<const EventSymbol> pattern) {
  if (pattern.empty() || pattern.size() > seq.size()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = 0; pos + pattern.size() <= seq.size(); ++pos) {
    if (std::equal(pattern.begin(), pattern.end(), seq.begin() + pos)) ++count;
  }
  return count;
}

std::vector<Pattern> filter_relevant(std::span<const Pattern> patterns, const ActionSet& actions,
                                     SuffixPolicy policy) {
  std::vector<Pattern> out;
  for (const auto& p : patterns) {
    if (p.has_wildcard()) continue;
    std::size_t index = 0;
    if (!first_action(p, actions, index) || index == 0) continue;
    if (policy == SuffixPolicy::action_final_only && index + 1 != p.symbols.size()) continue;
    out.push_back(p);
  }
  return out;
}

AssociationRule extract_rule(const Pattern& pattern, const ActionSet& actions,
                             std::span<const EventSymbol> context, const RegressionModel& model,
                             std::string_view home_id) {
  std::size_t index = 0;
  if (pattern.has_wildcard() || !first_action(pattern, actions, index) || index == 0) {
    throw ValidationError("pattern has no antecedent/action split");
  }
  AssociationRule rule;
  rule.home_id = std::string(home_id);
  rule.antecedent.assign(pattern.symbols.begin(), pattern.symbols.begin() + index);
  rule.consequent = pattern.symbols[index];
  rule.id = rule_id_for(rule.antecedent, rule.consequent);
  rule.pattern_length = index + 1;
  rule.action_position = index + 1;

  std::vector<EventSymbol> full = rule.antecedent;
  full.push_back(rule.consequent);
  rule.support_count = count_occurrences(context, full);
  rule.antecedent_count = count_occurrences(context, rule.antecedent);
  rule.relative_support = static_cast<double>(rule.support_count) /
                          static_cast<double>(window_count(context.size(), full.size()));
  rule.confidence = rule.antecedent_count
                        ? static_cast<double>(rule.support_count) /
                              static_cast<double>(rule.antecedent_count)
                        : 0.0;
  rule.weight = usefulness_coefficient(rule, model);
  return rule;
}

std::vector<AssociationRule> extract_rules(std::span<const Pattern> patterns,
                                           const ActionSet& actions,
                                           std::span<const EventSymbol> context,
                                           const RegressionModel& model, SuffixPolicy policy,
                                           std::string_view home_id) {
  std::map<std::string, AssociationRule> by_id;
  for (const auto& p : filter_relevant(patterns, actions, policy)) {
    auto rule = extract_rule(p, actions, context, model, home_id);
    by_id.try_emplace(rule.id, std::move(rule));
  }
  std::vector<AssociationRule> out;
  for (auto& [id, rule] : by_id) out.push_back(std::move(rule));
  return out;
}

double usefulness_coefficient(const AssociationRule& rule, const RegressionModel& model) {
  return model.coefficient(Feature::confidence) * rule.confidence +
         model.coefficient(Feature::pattern_length) * static_cast<double>(rule.pattern_length);
}

double exclusion_threshold(std::span<const AssociationRule> rules, const RegressionModel& model,
                           double fraction) {
  if (rules.empty()) return 0.0;
  std::vector<double> coefficients;
  for (const auto& r : rules) coefficients.push_back(usefulness_coefficient(r, model));
  std::sort(coefficients.begin(), coefficients.end());
  auto k = static_cast<std::size_t>(std::lround(std::clamp(fraction, 0.0, 1.0) *
                                                static_cast<double>(coefficients.size())));
  if (k >= coefficients.size()) return coefficients.back() + 1.0;
  return coefficients[k];
}

std::size_t apply_usefulness_threshold(std::span<AssociationRule> rules,
                                       const RegressionModel& model, double threshold) {
  std::size_t deactivated = 0;
  for (auto& rule : rules) {
    rule.weight = usefulness_coefficient(rule, model);
    if (rule.active && rule.weight < threshold) {
      rule.active = false;
      rule.deactivation = Deactivation::low_usefulness;
      ++deactivated;
    }
  }
  return deactivated;
}

void apply_feedback(AssociationRule& rule, Vote vote, std::size_t retirement_threshold) {
  rule.feedback_log.push_back(vote);
  if (vote == Vote::useful) {
    rule.negative_streak = 0;
    return;
  }
  ++rule.negative_streak;
  if (rule.negative_streak >= retirement_threshold && rule.active) {
    rule.active = false;
    rule.deactivation = Deactivation::negative_streak;
  }
}

std::optional<double> feedback_score(const AssociationRule& rule) {
  if (rule.feedback_log.empty()) return std::nullopt;
  double sum = 0.0;
  for (auto v : rule.feedback_log) sum += v == Vote::useful ? 1.0 : -1.0;
  return sum / static_cast<double>(rule.feedback_log.size());
}

RegressionModel fit_feedback_regression(std::span<const AssociationRule> rules, double alpha) {
  std::vector<RuleFeatures> features;
  std::vector<double> scores;
  for (const auto& rule : rules) {
    if (auto score = feedback_score(rule)) {
      features.push_back(rule.features());
      scores.push_back(*score);
    }
  }
  return fit_regression(features, scores, alpha);
}

void RuleSet::insert(AssociationRule rule) {
  std::string id = rule.id;
  rules_.insert_or_assign(std::move(id), std::move(rule));
}

const AssociationRule* RuleSet::find(std::string_view id) const {
  auto it = rules_.find(id);
  return it == rules_.end() ? nullptr : &it->second;
}

AssociationRule& RuleSet::at(std::string_view id) {
  auto it = rules_.find(id);
  if (it == rules_.end()) throw NotFoundError("unknown rule " + std::string(id));
  return it->second;
}

const AssociationRule& RuleSet::apply_feedback(std::string_view id, Vote vote) {
  auto& rule = at(id);
  shrec::apply_feedback(rule, vote, retirement_threshold_);
  return rule;
}

const AssociationRule& RuleSet::admin_reset(std::string_view id) {
  auto& rule = at(id);
  rule.active = true;
  rule.deactivation = Deactivation::none;
  rule.negative_streak = 0;
  return rule;
}

std::vector<AssociationRule> RuleSet::rules() const {
  std::vector<AssociationRule> out;
  out.reserve(rules_.size());
  for (const auto& [id, rule] : rules_) out.push_back(rule);
  return out;
}

void to_json(json& j, const AssociationRule& rule) {
  json antecedent = json::array();
  for (auto s : rule.antecedent) antecedent.push_back(s.str());
  json votes = json::array();
  for (auto v : rule.feedback_log) votes.push_back(to_string(v));
  j = json{{"id", rule.id},
           {"home", rule.home_id},
           {"antecedent", antecedent},
           {"consequent", rule.consequent.str()},
           {"support_count", rule.support_count},
           {"rel_support", rule.relative_support},
           {"antecedent_count", rule.antecedent_count},
           {"confidence", rule.confidence},
           {"pattern_length", rule.pattern_length},
           {"action_position", rule.action_position},
           {"weight", rule.weight},
           {"active", rule.active},
           {"deactivation", to_string(rule.deactivation)},
           {"negative_streak", rule.negative_streak},
           {"feedback_log", votes}};
}

void from_json(const json& j, AssociationRule& rule) {
  auto symbol = [](const json& v) {
    auto s = v.is_string() ? EventSymbol::parse(v.get<std::string>()) : std::nullopt;
    if (!s || s->is_wildcard()) throw FormatError("bad rule symbol " + v.dump());
    return *s;
  };
  rule = AssociationRule{};
  rule.id = j.at("id").get<std::string>();
  rule.home_id = j.value("home", "");
  for (const auto& s : j.at("antecedent")) rule.antecedent.push_back(symbol(s));
  rule.consequent = symbol(j.at("consequent"));
  rule.support_count = j.value("support_count", std::size_t{0});
  rule.relative_support = j.value("rel_support", 0.0);
  rule.antecedent_count = j.value("antecedent_count", std::size_t{0});
  rule.confidence = j.value("confidence", 0.0);
  rule.pattern_length = j.value("pattern_length", rule.antecedent.size() + 1);
  rule.action_position = j.value("action_position", rule.antecedent.size() + 1);
  rule.weight = j.value("weight", 0.0);
  rule.active = j.value("active", true);
  rule.deactivation = deactivation_from_string(j.value("deactivation", "none"));
  rule.negative_streak = j.value("negative_streak", std::size_t{0});
  if (j.contains("feedback_log")) {
    for (const auto& v : j["feedback_log"]) {
      auto vote = v.is_string() ? vote_from_string(v.get<std::string>()) : std::nullopt;
      if (!vote) throw FormatError("bad vote " + v.dump());
      rule.feedback_log.push_back(*vote);
    }
  }
  if (rule.antecedent.empty()) throw FormatError("rule " + rule.id + " has an empty antecedent");
}

void write_rules_jsonl(std::ostream& out, std::span<const AssociationRule> rules) {
  for (const auto& rule : rules) out << json(rule).dump() << '\n';
}

std::vector<AssociationRule> read_rules_jsonl(std::istream& in) {
  std::vector<AssociationRule> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("bad rule line: " + line);
    try {
      out.push_back(j.get<AssociationRule>());
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad rule line: ") + e.what());
    }
  }
  return out;
}

}  // namespace shrec
