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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shrec/events.hpp"
#include "shrec/wsdd.hpp"

namespace shrec {

struct PlantedSpec {
  std::vector<std::uint32_t> symbols;  // generator ids, 1..alphabet_size
  double target_support = 0.0;         // relative, over N - length + 1 windows
  std::optional<std::size_t> period;   // in events; none = Poisson placement
  double jitter_cv = 0.0;              // target CV of successive intervals
};

struct SyntheticSpec {
  std::size_t alphabet_size = 10;
  std::size_t event_count = 1000;
  std::vector<PlantedSpec> planted;
  /// Noise distribution over symbols 1..alphabet_size; empty = uniform. A
  /// zero weight keeps a symbol out of the noise.
  std::vector<double> noise_weights;
  std::uint64_t seed = 1;
  Seconds event_gap{60};
  Timestamp start{std::chrono::sys_days{std::chrono::year{2014} / 1 / 1}};
  std::string home_id = "SYN";

  /// Throws ValidationError, including for plants that cannot fit.
  void validate() const;
  std::size_t planted_count(std::size_t index) const;
};

/// Accepts JSON or the equivalent TOML (top-level keys plus `[[planted]]`).
SyntheticSpec parse_synthetic_spec(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
nlohmann::json to_json(const SyntheticSpec& spec);

struct ManifestEntry {
  std::vector<EventSymbol> symbols;
  std::vector<std::size_t> positions;  // exact planted starts, ascending
  std::optional<std::size_t> period;
  double jitter_cv = 0.0;
};

struct SyntheticLog {
  EventLog log;
  std::vector<EventSymbol> symbols;  // generator ids, one per event
  std::vector<Timestamp> timestamps;
  std::vector<ManifestEntry> manifest;
};

/// Plants periodic patterns first (offset + k * period plus Gaussian
/// jitter), then the others at uniformly random free slots, then fills the
/// rest with noise. Events are `event_gap` apart. Same spec, same output.
SyntheticLog generate(const SyntheticSpec& spec);

/// A Zipf-skewed home of about forty scene classes with a handful of
/// daily-routine patterns, sized to `event_count`.
SyntheticSpec home_like_spec(std::size_t event_count, std::uint64_t seed = 7);

enum class Miner { wsdd, prefix_growth, brute_force };
std::string_view to_string(Miner miner);
/// Accepts "wsdd", "prefix", "prefix_growth", "brute", "brute_force".
std::optional<Miner> miner_from_string(std::string_view name);

struct BenchCase {
  std::string label;
  std::vector<EventSymbol> symbols;
  std::vector<Timestamp> timestamps;
};

struct BenchOptions {
  std::vector<Miner> miners{Miner::wsdd, Miner::prefix_growth, Miner::brute_force};
  std::vector<MiningParams> params{MiningParams{}};
  std::size_t repeats = 5;
  std::size_t warmup = 1;
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
  /// Called after each finished row.
  std::function<void(const struct BenchRow&)> progress;
};

struct BenchRow {
  Miner miner = Miner::wsdd;
  std::string label;
  std::size_t events = 0;
  double min_support = 0.0;
  std::size_t max_window = 0;
  bool dnf = false;
  double wall_ms = 0.0;       // median
  double peak_mem_mib = 0.0;  // median
  std::size_t patterns_found = 0;
  std::vector<double> samples_ms;
};

/// Serial; a run past the timeout becomes a DNF row and the remaining
/// repeats of that row are skipped.
std::vector<BenchRow> run_benchmark(std::span<const BenchCase> cases, const BenchOptions& options);

/// `miner,events,min_support,max_window,wall_ms,peak_mem_mib,patterns_found`;
/// DNF rows carry "DNF" as wall time and leave the rest empty.
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

}  // namespace shrec
