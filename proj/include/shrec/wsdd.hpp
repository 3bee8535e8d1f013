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
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shrec/events.hpp"
#include "shrec/time.hpp"

namespace shrec {

struct MiningParams {
  std::size_t max_window = 5;      // longest pattern, >= 2
  double min_support = 0.01;       // strict lower bound on relative support
  std::size_t max_wildcards = 0;   // interior wildcards per pattern
  double periodicity_cv_threshold = 0.15;

  /// Throws ValidationError.
  void validate() const;
};

/// A contiguous symbol sequence, possibly with interior wildcards, and the
/// distinct start positions at which it occurs in the mined sequence.
struct Pattern {
  std::vector<EventSymbol> symbols;
  std::size_t support_count = 0;
  double relative_support = 0.0;  // support_count / max(1, N - length + 1)
  double event_support = 0.0;     // support_count / max(1, N)
  std::vector<std::size_t> occurrence_starts;

  std::size_t length() const { return symbols.size(); }
  bool has_wildcard() const;
  std::vector<std::size_t> wildcard_positions() const;
};

struct PeriodicityInfo {
  bool is_periodic = false;
  std::optional<double> mean_interval;  // seconds
  std::optional<double> interval_cv;

  bool operator==(const PeriodicityInfo&) const = default;
};

struct MinedPattern {
  Pattern pattern;
  PeriodicityInfo periodicity;
};

using MiningResult = std::vector<MinedPattern>;

/// Cooperative cancellation for long mining runs.
struct Deadline {
  std::chrono::steady_clock::time_point at = std::chrono::steady_clock::time_point::max();

  static Deadline after(std::chrono::steady_clock::duration d) {
    return Deadline{std::chrono::steady_clock::now() + d};
  }
  bool expired() const { return std::chrono::steady_clock::now() >= at; }
  /// Throws TimeoutError once expired.
  void check() const;
};

/// Number of length-`length` windows in a sequence of `n` symbols (at least 1).
inline std::size_t window_count(std::size_t n, std::size_t length) {
  return n >= length ? n - length + 1 : 1;
}

/// The single support test shared by every miner.
inline bool exceeds_min_support(std::size_t count, std::size_t n, std::size_t length,
                                double min_support) {
  return static_cast<double>(count) / static_cast<double>(window_count(n, length)) > min_support;
}

/// Hash-map key of a pattern: symbol ids joined by ',' with '*' for wildcards.
std::string pattern_key(std::span<const EventSymbol> symbols);

/// Sliding-window miner with de-duplicated counting. Every window start is
/// visited once; all patterns beginning there (lengths 2..max_window, plus
/// wildcard variants) are counted in the same pass, each (pattern, start)
/// pair at most once. Patterns whose relative support does not exceed
/// min_support are dropped afterwards. Returns the canonical order.
MiningResult mine(std::span<const EventSymbol> seq, std::span<const Timestamp> timestamps,
                  const MiningParams& params, const Deadline* deadline = nullptr);

/// mine() with wildcard output enabled; `params.max_wildcards == 0` behaves
/// exactly like mine().
MiningResult mine_wildcarded(std::span<const EventSymbol> seq,
                             std::span<const Timestamp> timestamps, const MiningParams& params,
                             const Deadline* deadline = nullptr);

/// Coefficient-of-variation test over successive occurrence intervals.
/// Periodic needs at least three occurrences and cv <= threshold.
PeriodicityInfo periodicity(std::span<const Timestamp> occurrence_times, double threshold);

/// Support descending, then length ascending, then symbols ascending.
void sort_canonical(std::vector<Pattern>& patterns);
void sort_canonical(MiningResult& result);

void write_patterns_jsonl(std::ostream& out, const MiningResult& result);

/// Inverse of write_patterns_jsonl; occurrence starts are not stored in the
/// file and come back empty.
MiningResult read_patterns_jsonl(std::istream& in);

}  // namespace shrec
