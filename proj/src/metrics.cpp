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

#include "shrec/metrics.hpp"

#include <fmt/format.h>

#include <set>

namespace shrec {

MetricsSnapshot compute_metrics(std::span<const Recommendation> recommendations,
                                std::span<const AssociationRule> rules, Timestamp from,
                                Timestamp to, std::size_t homes) {
  MetricsSnapshot m;
  m.from = from;
  m.to = to;
  m.homes = homes;
  std::set<std::pair<std::string, std::string>> emitting;
  for (const auto& rec : recommendations) {
    if (rec.created_at < from || rec.created_at >= to) continue;
    ++m.recommendations_sent;
    emitting.emplace(rec.home_id, rec.rule_id);
    if (rec.status == RecommendationStatus::accepted_useful) ++m.voted_useful;
    if (rec.status == RecommendationStatus::rejected_not_useful) ++m.voted_not_useful;
  }
  m.answered = m.voted_useful + m.voted_not_useful;
  m.ratio_useful_answered = m.answered ? static_cast<double>(m.voted_useful) /
                                             static_cast<double>(m.answered)
                                       : 0.0;
  m.rules_emitting = emitting.size();
  for (const auto& rule : rules) {
    if (rule.active) ++m.active_rules;
    if (rule.deactivation == Deactivation::negative_streak) ++m.rules_retired_by_streak;
  }
  const double days = static_cast<double>((to - from).count()) / 86400.0;
  if (days > 0.0 && homes > 0) {
    m.recs_per_day_per_home =
        static_cast<double>(m.recommendations_sent) / (days * static_cast<double>(homes));
  }
  return m;
}

std::string format_percent(double ratio) { return fmt::format("{:.2f}%", ratio * 100.0); }

void to_json(nlohmann::json& j, const MetricsSnapshot& m) {
  j = nlohmann::json{{"from", format_iso8601(m.from)},
                     {"to", format_iso8601(m.to)},
                     {"homes", m.homes},
                     {"recommendations_sent", m.recommendations_sent},
                     {"answered", m.answered},
                     {"voted_useful", m.voted_useful},
                     {"voted_not_useful", m.voted_not_useful},
                     {"ratio_useful_answered", m.ratio_useful_answered},
                     {"ratio_useful_answered_pct", format_percent(m.ratio_useful_answered)},
                     {"active_rules", m.active_rules},
                     {"rules_emitting", m.rules_emitting},
                     {"rules_retired_by_streak", m.rules_retired_by_streak},
                     {"recs_per_day_per_home", m.recs_per_day_per_home}};
}

}  // namespace shrec
