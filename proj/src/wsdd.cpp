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

#include "shrec/wsdd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>
#include <cstdint>

#include "json.hpp"
#include "shrec/errors.hpp"

namespace shrec {

namespace {

// Window trie: every distinct pattern is one node, reached by walking its
// symbols from the root.
class WindowTrie {
 public:
  static constexpr std::uint32_t kRoot = 0;

  WindowTrie() : edges_(1024), mask_(1023) { nodes_.push_back(Node{}); }

  std::uint32_t child(std::uint32_t parent, EventSymbol symbol) {
    const std::uint64_t key = (std::uint64_t{parent} << 32) | symbol.id;
    std::size_t i = slot_of(key);
    while (true) {
      auto& e = edges_[i];
      if (e.child == kNone) break;
      if (e.key == key) return e.child;
      i = (i + 1) & mask_;
    }
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{parent, symbol, nodes_[parent].depth + 1,
                          nodes_[parent].wildcards + (symbol.is_wildcard() ? 1u : 0u)});
    edges_[i] = Edge{key, id};
    if (++used_ * 2 > edges_.size()) grow();
    return id;
  }

  void hit(std::uint32_t node, std::size_t start) {
    auto& n = nodes_[node];
    if (n.count == 0 || n.last_start != start) {
      ++n.count;
      n.last_start = start;
    }
  }

  std::vector<EventSymbol> path(std::uint32_t node) const {
    std::vector<EventSymbol> out(nodes_[node].depth);
    for (auto i = out.size(); i > 0; --i) {
      out[i - 1] = nodes_[node].symbol;
      node = nodes_[node].parent;
    }
    return out;
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t count(std::uint32_t node) const { return nodes_[node].count; }
  std::size_t depth(std::uint32_t node) const { return nodes_[node].depth; }
  EventSymbol last(std::uint32_t node) const { return nodes_[node].symbol; }
  std::size_t wildcards(std::uint32_t node) const { return nodes_[node].wildcards; }

  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

 private:
  struct Node {
    std::uint32_t parent = 0;
    EventSymbol symbol{};
    std::uint32_t depth = 0;
    std::uint32_t wildcards = 0;
    std::uint32_t count = 0;
    std::size_t last_start = 0;
  };

  struct Edge {
    std::uint64_t key = 0;
    std::uint32_t child = kNone;
  };

  std::size_t slot_of(std::uint64_t key) const {
    return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ull) >> 20) & mask_;
  }

  void grow() {
    std::vector<Edge> old(edges_.size() * 2);
    old.swap(edges_);
    mask_ = edges_.size() - 1;
    for (const auto& e : old) {
      if (e.child == kNone) continue;
      std::size_t i = slot_of(e.key);
      while (edges_[i].child != kNone) i = (i + 1) & mask_;
      edges_[i] = e;
    }
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::size_t mask_;
  std::size_t used_ = 0;
};

void append_symbol(std::string& key, EventSymbol symbol) {
  if (!key.empty()) key += ',';
  if (symbol.is_wildcard()) {
    key += '*';
    return;
  }
  char buf[16];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, symbol.id);
  key.append(buf, ptr);
}

bool symbols_less(const std::vector<EventSymbol>& a, const std::vector<EventSymbol>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool canonical_less(const Pattern& a, const Pattern& b) {
  if (a.support_count != b.support_count) return a.support_count > b.support_count;
  if (a.symbols.size() != b.symbols.size()) return a.symbols.size() < b.symbols.size();
  return symbols_less(a.symbols, b.symbols);
}

}  // namespace

void MiningParams::validate() const {
  if (max_window < 2) throw ValidationError("max_window must be at least 2");
  if (!(min_support >= 0.0 && min_support <= 1.0)) {
    throw ValidationError("min_support must lie in [0, 1]");
  }
  if (!(periodicity_cv_threshold >= 0.0)) {
    throw ValidationError("periodicity_cv_threshold must be non-negative");
  }
}

void Deadline::check() const {
  if (expired()) throw TimeoutError("mining deadline exceeded");
}

bool Pattern::has_wildcard() const {
  return std::any_of(symbols.begin(), symbols.end(), [](EventSymbol s) { return s.is_wildcard(); });
}

std::vector<std::size_t> Pattern::wildcard_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i].is_wildcard()) out.push_back(i);
  }
  return out;
}

std::string pattern_key(std::span<const EventSymbol> symbols) {
  std::string key;
  for (auto s : symbols) append_symbol(key, s);
  return key;
}

MiningResult mine(std::span<const EventSymbol> seq, std::span<const Timestamp> timestamps,
                  const MiningParams& params, const Deadline* deadline) {
  params.validate();
  if (seq.size() != timestamps.size()) {
    throw ValidationError("symbol and timestamp sequences differ in length");
  }
  if (!std::is_sorted(timestamps.begin(), timestamps.end())) {
    throw ValidationError("timestamps must be non-decreasing");
  }
  const std::size_t n = seq.size();
  if (n < 2) return {};

  // Level-wise window sliding. Level L holds one (start, node) entry per
  // distinct length-L window variant; an entry is extended only while its node
  // can still clear min_support, since count(P x) <= count(P).
  struct Entry {
    std::size_t start;
    std::uint32_t node;
  };
  WindowTrie trie;
  std::vector<Entry> level;
  std::vector<Entry> next;
  level.reserve(n);
  for (std::size_t start = 0; start + 1 < n; ++start) {
    auto node = trie.child(WindowTrie::kRoot, seq[start]);
    trie.hit(node, start);
    level.push_back({start, node});
  }

  MiningResult result;
  std::vector<std::int64_t> slot;
  for (std::size_t length = 2; length <= params.max_window && !level.empty(); ++length) {
    const double floor = params.min_support * static_cast<double>(window_count(n, length));
    next.clear();
    std::size_t visited = 0;
    for (const auto& e : level) {
      if (deadline && (++visited & 0xFFF) == 0) deadline->check();
      if (e.start + length > n || static_cast<double>(trie.count(e.node)) <= floor) continue;
      auto node = trie.child(e.node, seq[e.start + length - 1]);
      trie.hit(node, e.start);
      next.push_back({e.start, node});
      if (length < params.max_window && trie.wildcards(e.node) < params.max_wildcards) {
        auto held = trie.child(e.node, EventSymbol::wildcard());
        trie.hit(held, e.start);
        next.push_back({e.start, held});
      }
    }
    level.swap(next);

    slot.assign(trie.size(), -1);
    for (const auto& e : level) {
      if (slot[e.node] == -1) {
        const std::size_t count = trie.count(e.node);
        const bool emit = !trie.last(e.node).is_wildcard() &&
                          exceeds_min_support(count, n, length, params.min_support);
        slot[e.node] = emit ? static_cast<std::int64_t>(result.size()) : -2;
        if (!emit) continue;
        MinedPattern mined;
        mined.pattern.symbols = trie.path(e.node);
        mined.pattern.support_count = count;
        mined.pattern.relative_support =
            static_cast<double>(count) / static_cast<double>(window_count(n, length));
        mined.pattern.event_support = static_cast<double>(count) / static_cast<double>(n);
        mined.pattern.occurrence_starts.reserve(count);
        result.push_back(std::move(mined));
      }
      if (slot[e.node] < 0) continue;
      auto& starts = result[static_cast<std::size_t>(slot[e.node])].pattern.occurrence_starts;
      if (starts.empty() || starts.back() != e.start) starts.push_back(e.start);
    }
  }

  std::vector<Timestamp> times;
  for (auto& mined : result) {
    times.clear();
    for (auto s : mined.pattern.occurrence_starts) times.push_back(timestamps[s]);
    mined.periodicity = periodicity(times, params.periodicity_cv_threshold);
  }
  sort_canonical(result);
  return result;
}

MiningResult mine_wildcarded(std::span<const EventSymbol> seq,
                             std::span<const Timestamp> timestamps, const MiningParams& params,
                             const Deadline* deadline) {
  return mine(seq, timestamps, params, deadline);
}

PeriodicityInfo periodicity(std::span<const Timestamp> occurrence_times, double threshold) {
  PeriodicityInfo info;
  if (occurrence_times.size() < 2) return info;
  const std::size_t intervals = occurrence_times.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 1; i < occurrence_times.size(); ++i) {
    sum += to_seconds(occurrence_times[i]) - to_seconds(occurrence_times[i - 1]);
  }
  const double mean = sum / static_cast<double>(intervals);
  info.mean_interval = mean;
  if (mean <= 0.0) return info;
  double squares = 0.0;
  for (std::size_t i = 1; i < occurrence_times.size(); ++i) {
    double d = to_seconds(occurrence_times[i]) - to_seconds(occurrence_times[i - 1]) - mean;
    squares += d * d;
  }
  // Population deviation: the intervals are all there is, not a sample.
  const double cv = std::sqrt(squares / static_cast<double>(intervals)) / mean;
  info.interval_cv = cv;
  info.is_periodic = occurrence_times.size() >= 3 && cv <= threshold;
  return info;
}

void sort_canonical(std::vector<Pattern>& patterns) {
  std::sort(patterns.begin(), patterns.end(), canonical_less);
}

void sort_canonical(MiningResult& result) {
  std::sort(result.begin(), result.end(), [](const MinedPattern& a, const MinedPattern& b) {
    return canonical_less(a.pattern, b.pattern);
  });
}

void write_patterns_jsonl(std::ostream& out, const MiningResult& result) {
  for (const auto& mined : result) {
    nlohmann::ordered_json obj;
    auto& symbols = obj["pattern"] = nlohmann::ordered_json::array();
    for (auto s : mined.pattern.symbols) symbols.push_back(s.str());
    obj["count"] = mined.pattern.support_count;
    obj["rel_support"] = mined.pattern.relative_support;
    obj["periodic"] = mined.periodicity.is_periodic;
    obj["mean_interval_s"] = mined.periodicity.mean_interval
                                 ? nlohmann::ordered_json(*mined.periodicity.mean_interval)
                                 : nlohmann::ordered_json(nullptr);
    obj["event_rel_support"] = mined.pattern.event_support;
    obj["interval_cv"] = mined.periodicity.interval_cv
                             ? nlohmann::ordered_json(*mined.periodicity.interval_cv)
                             : nlohmann::ordered_json(nullptr);
    out << obj.dump() << '\n';
  }
}

MiningResult read_patterns_jsonl(std::istream& in) {
  MiningResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("pattern") ||
        !obj["pattern"].is_array()) {
      throw FormatError("bad pattern line: " + line);
    }
    MinedPattern mined;
    for (const auto& item : obj["pattern"]) {
      auto symbol = item.is_string() ? EventSymbol::parse(item.get<std::string>()) : std::nullopt;
      if (!symbol) throw FormatError("bad pattern symbol in: " + line);
      mined.pattern.symbols.push_back(*symbol);
    }
    mined.pattern.support_count = obj.value("count", std::size_t{0});
    mined.pattern.relative_support = obj.value("rel_support", 0.0);
    mined.pattern.event_support = obj.value("event_rel_support", 0.0);
    mined.periodicity.is_periodic = obj.value("periodic", false);
    if (obj.contains("mean_interval_s") && obj["mean_interval_s"].is_number()) {
      mined.periodicity.mean_interval = obj["mean_interval_s"].get<double>();
    }
    if (obj.contains("interval_cv") && obj["interval_cv"].is_number()) {
      mined.periodicity.interval_cv = obj["interval_cv"].get<double>();
    }
    result.push_back(std::move(mined));
  }
  return result;
}

}  // namespace shrec
