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

#include <sstream>

#include <gtest/gtest.h>

#include "shrec/errors.hpp"
#include "shrec/rules.hpp"
#include "test_support.hpp"

namespace shrec {
namespace {

using testing::syms;

const std::string kFixtures = SHREC_FIXTURES;

// a = lightOn, b = tvOn, o = lightOff (the only action unless stated).
const ActionSet kOff = ActionSet::of({EventSymbol{'o' - 'a' + 1}});

Pattern pattern(const std::string& text, std::size_t count = 1) {
  Pattern p;
  p.symbols = syms(text);
  p.support_count = count;
  return p;
}

TEST(ActionCatalogTest, TomlAndJsonAgree) {
  auto toml = ActionCatalog::load(kFixtures + "/actions.toml");
  auto json = ActionCatalog::load(kFixtures + "/actions.json");
  EXPECT_EQ(toml.scenes(), json.scenes());
  EXPECT_TRUE(toml.is_action(DeviceGroup::lighting, 422));
  EXPECT_TRUE(toml.is_action(DeviceGroup::heating, 0));
  EXPECT_FALSE(toml.is_action(DeviceGroup::heating, 67));
  EXPECT_FALSE(toml.is_action(DeviceGroup::shades, 0));
}

TEST(ActionCatalogTest, InlineTomlAndErrors) {
  auto inline_table = ActionCatalog::parse("actions = {lighting = [0, 5], audio = [67]}\n");
  EXPECT_TRUE(inline_table.is_action(DeviceGroup::lighting, 5));
  EXPECT_TRUE(inline_table.is_action(DeviceGroup::audio, 67));
  EXPECT_THROW(ActionCatalog::parse("other = 1\n"), FormatError);
  EXPECT_THROW(ActionCatalog::parse("{\"actions\": 3}"), FormatError);
}

TEST(ActionCatalogTest, Defaults) {
  auto d = ActionCatalog::defaults();
  for (auto g : {DeviceGroup::lighting, DeviceGroup::audio, DeviceGroup::heating}) {
    EXPECT_TRUE(d.is_action(g, 0));
    EXPECT_TRUE(d.is_action(g, 67));
  }
  EXPECT_FALSE(d.is_action(DeviceGroup::lighting, 434));
}

TEST(ActionCatalogTest, BindsToSymbols) {
  EventLog log{"H1", {}};
  Timestamp t{std::chrono::sys_days{std::chrono::year{2012} / 4 / 28}};
  for (std::int64_t scene : {434, 424, 422}) {
    log.events.push_back(Event{t, "H1", "Z3", "living room", "D17", scene, 381, DeviceGroup::lighting});
    t += Seconds(60);
  }
  auto sym = symbolize(log);
  auto actions = ActionCatalog::load(kFixtures + "/actions.toml").bind(sym.table);
  EXPECT_FALSE(actions.contains(sym.symbols[0]));
  EXPECT_FALSE(actions.contains(sym.symbols[1]));
  EXPECT_TRUE(actions.contains(sym.symbols[2]));
  EXPECT_FALSE(actions.contains(EventSymbol::wildcard()));
}

TEST(FilterRelevantTest, ComponentRules) {
  std::vector<Pattern> patterns{pattern("abo"), pattern("ab"), pattern("oa"), pattern("a*o")};
  auto kept = filter_relevant(patterns, kOff);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].symbols, syms("abo"));
  EXPECT_TRUE(filter_relevant(patterns, ActionSet{}).empty());
}

TEST(FilterRelevantTest, SuffixPolicy) {
  std::vector<Pattern> patterns{pattern("abo"), pattern("aob")};
  EXPECT_EQ(filter_relevant(patterns, kOff, SuffixPolicy::discard).size(), 2u);
  auto final_only = filter_relevant(patterns, kOff, SuffixPolicy::action_final_only);
  ASSERT_EQ(final_only.size(), 1u);
  EXPECT_EQ(final_only[0].symbols, syms("abo"));
}

TEST(ExtractRuleTest, SplitsAtFirstAction) {
  auto context = syms("aboabxabo");
  auto rule = extract_rule(pattern("abo"), kOff, context);
  EXPECT_EQ(rule.antecedent, syms("ab"));
  EXPECT_EQ(rule.consequent, syms("o")[0]);
  EXPECT_EQ(rule.pattern_length, 3u);
  EXPECT_EQ(rule.action_position, 3u);
  EXPECT_EQ(rule.id, "S1-S2>S15");
  EXPECT_EQ(rule.support_count, 2u);
  EXPECT_EQ(rule.antecedent_count, 3u);
  EXPECT_DOUBLE_EQ(rule.confidence, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rule.relative_support, 2.0 / 7.0);
  EXPECT_TRUE(rule.active);

  auto trailing = extract_rule(pattern("aob"), kOff, context);
  EXPECT_EQ(trailing.antecedent, syms("a"));
  EXPECT_EQ(trailing.pattern_length, 2u);
  EXPECT_EQ(trailing.action_position, 2u);

  EXPECT_THROW(extract_rule(pattern("oab"), kOff, context), ValidationError);
  EXPECT_THROW(extract_rule(pattern("ab"), kOff, context), ValidationError);
}

TEST(ExtractRuleTest, ConfidenceSevenOfTen) {
  // X = (a,b) ten times, followed by the action o seven times.
  std::string text;
  for (int i = 0; i < 10; ++i) text += i < 7 ? "abo" : "abc";
  auto context = syms(text);
  EXPECT_EQ(count_occurrences(context, syms("ab")), 10u);
  auto rule = extract_rule(pattern("abo"), kOff, context);
  EXPECT_DOUBLE_EQ(rule.confidence, 0.7);
}

TEST(ExtractRuleTest, ConfidenceBounded) {
  std::mt19937_64 rng(2);
  auto context = testing::random_sequence(rng, 2000, 5);
  auto actions = ActionSet::of({EventSymbol{5}});
  MiningParams params;
  params.min_support = 0.0;
  params.max_window = 4;
  std::vector<Pattern> patterns;
  for (auto& m : mine(context, testing::minute_ticks(context.size()), params)) {
    patterns.push_back(m.pattern);
  }
  auto rules = extract_rules(patterns, actions, context);
  ASSERT_FALSE(rules.empty());
  for (const auto& r : rules) {
    EXPECT_GE(r.confidence, 0.0);
    EXPECT_LE(r.confidence, 1.0);
    EXPECT_GE(r.antecedent_count, r.support_count);
    for (auto s : r.antecedent) EXPECT_FALSE(actions.contains(s));
    EXPECT_TRUE(actions.contains(r.consequent));
  }
  EXPECT_TRUE(std::is_sorted(rules.begin(), rules.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST(ExtractRulesTest, DeduplicatesTrailingVariants) {
  auto context = syms("aboaobabo");
  auto rules = extract_rules(std::vector<Pattern>{pattern("aob"), pattern("ao")}, kOff, context);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].id, "S1>S15");
}

TEST(UsefulnessTest, Arithmetic) {
  RegressionModel model;
  model.coefficients[static_cast<std::size_t>(Feature::confidence)].estimate = 2.0;
  model.coefficients[static_cast<std::size_t>(Feature::pattern_length)].estimate = 0.5;
  AssociationRule rule;
  rule.confidence = 0.8;
  rule.pattern_length = 3;
  EXPECT_NEAR(usefulness_coefficient(rule, model), 3.1, 1e-12);
  EXPECT_NEAR(usefulness_coefficient(rule, RegressionModel::unit_defaults()), 3.8, 1e-12);
}

TEST(UsefulnessTest, ThresholdDeactivates) {
  RegressionModel model;
  model.coefficients[static_cast<std::size_t>(Feature::confidence)].estimate = 2.0;
  model.coefficients[static_cast<std::size_t>(Feature::pattern_length)].estimate = 0.5;
  std::vector<AssociationRule> rules(4);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    rules[i].id = "r" + std::to_string(i);
    rules[i].confidence = 0.25 * static_cast<double>(i);
    rules[i].pattern_length = 2;
  }
  // coefficients 1.0, 1.5, 2.0, 2.5
  EXPECT_DOUBLE_EQ(exclusion_threshold(rules, model, 0.5), 2.0);
  EXPECT_EQ(apply_usefulness_threshold(rules, model, 2.0), 2u);
  EXPECT_FALSE(rules[0].active);
  EXPECT_EQ(rules[0].deactivation, Deactivation::low_usefulness);
  EXPECT_FALSE(rules[1].active);
  EXPECT_TRUE(rules[2].active);
  EXPECT_DOUBLE_EQ(rules[3].weight, 2.5);
}

TEST(UsefulnessTest, ZeroModelExcludesNothingBelowZero) {
  RegressionModel zero;
  std::vector<AssociationRule> rules(3);
  for (auto& r : rules) r.confidence = 0.9, r.pattern_length = 4;
  EXPECT_EQ(apply_usefulness_threshold(rules, zero, -0.5), 0u);
  for (const auto& r : rules) {
    EXPECT_DOUBLE_EQ(r.weight, 0.0);
    EXPECT_TRUE(r.active);
  }
}

TEST(UsefulnessTest, DefaultExclusionShare) {
  std::vector<AssociationRule> rules(54);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    rules[i].confidence = static_cast<double>(i) / 100.0;
    rules[i].pattern_length = 2;
  }
  auto model = RegressionModel::unit_defaults();
  double threshold = exclusion_threshold(rules, model, kDefaultExclusionFraction);
  EXPECT_EQ(apply_usefulness_threshold(rules, model, threshold), 19u);
}

TEST(FeedbackTest, TenNegativesRetire) {
  AssociationRule rule;
  for (int i = 0; i < 9; ++i) apply_feedback(rule, Vote::not_useful);
  EXPECT_TRUE(rule.active);
  EXPECT_EQ(rule.negative_streak, 9u);
  apply_feedback(rule, Vote::not_useful);
  EXPECT_FALSE(rule.active);
  EXPECT_EQ(rule.deactivation, Deactivation::negative_streak);
}

TEST(FeedbackTest, UsefulResetsStreak) {
  AssociationRule rule;
  for (int i = 0; i < 9; ++i) apply_feedback(rule, Vote::not_useful);
  apply_feedback(rule, Vote::useful);
  EXPECT_EQ(rule.negative_streak, 0u);
  EXPECT_TRUE(rule.active);
  EXPECT_EQ(rule.feedback_log.size(), 10u);
  EXPECT_DOUBLE_EQ(*feedback_score(rule), -0.8);
}

TEST(FeedbackTest, FreshRuleUseful) {
  AssociationRule rule;
  EXPECT_FALSE(feedback_score(rule));
  apply_feedback(rule, Vote::useful);
  EXPECT_EQ(rule.negative_streak, 0u);
  EXPECT_EQ(rule.feedback_log.size(), 1u);
}

TEST(FeedbackTest, RetiredStaysRetiredUntilReset) {
  RuleSet set;
  AssociationRule rule;
  rule.id = "S1>S2";
  set.insert(rule);
  for (int i = 0; i < 10; ++i) set.apply_feedback("S1>S2", Vote::not_useful);
  EXPECT_FALSE(set.find("S1>S2")->active);
  set.apply_feedback("S1>S2", Vote::useful);
  EXPECT_FALSE(set.find("S1>S2")->active);
  EXPECT_EQ(set.find("S1>S2")->negative_streak, 0u);
  set.admin_reset("S1>S2");
  EXPECT_TRUE(set.find("S1>S2")->active);
  EXPECT_EQ(set.find("S1>S2")->deactivation, Deactivation::none);
  EXPECT_THROW(set.apply_feedback("nope", Vote::useful), NotFoundError);
}

TEST(FeedbackTest, ConfigurableThreshold) {
  RuleSet set(3);
  AssociationRule rule;
  rule.id = "r";
  set.insert(rule);
  for (int i = 0; i < 3; ++i) set.apply_feedback("r", Vote::not_useful);
  EXPECT_FALSE(set.find("r")->active);
}

TEST(RulesJsonlTest, RoundTrip) {
  auto context = syms("aboabxabo");
  auto rule = extract_rule(pattern("abo"), kOff, context, RegressionModel::unit_defaults(), "H1");
  apply_feedback(rule, Vote::not_useful);
  apply_feedback(rule, Vote::useful);
  std::stringstream buf;
  write_rules_jsonl(buf, std::vector<AssociationRule>{rule});
  auto back = read_rules_jsonl(buf);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], rule);
}

}  // namespace
}  // namespace shrec
