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

#include <cstddef>
#include <span>
#include <string>

#include "json.hpp"
#include "shrec/engine.hpp"
#include "shrec/rules.hpp"
#include "shrec/time.hpp"

namespace shrec {

/// Evaluation counters over recommendations created in [from, to).
struct MetricsSnapshot {
  Timestamp from{};
  Timestamp to{};
  std::size_t homes = 0;
  std::size_t recommendations_sent = 0;
  std::size_t answered = 0;
  std::size_t voted_useful = 0;
  std::size_t voted_not_useful = 0;
  double ratio_useful_answered = 0.0;  // voted_useful / max(1, answered)
  std::size_t active_rules = 0;
  std::size_t rules_emitting = 0;
  std::size_t rules_retired_by_streak = 0;
  double recs_per_day_per_home = 0.0;

  bool operator==(const MetricsSnapshot&) const = default;
};

MetricsSnapshot compute_metrics(std::span<const Recommendation> recommendations,
                                std::span<const AssociationRule> rules, Timestamp from,
                                Timestamp to, std::size_t homes);

/// Two decimals and a percent sign, e.g. "9.21%".
std::string format_percent(double ratio);

void to_json(nlohmann::json& j, const MetricsSnapshot& m);

}  // namespace shrec
