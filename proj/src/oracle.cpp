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

#include "shrec/oracle.hpp"

#include <algorithm>
#include <map>

#include "shrec/memory.hpp"

namespace shrec {

namespace {

void collect_candidates(std::vector<EventSymbol>& window, std::size_t from, std::size_t budget,
                        std::vector<std::vector<EventSymbol>>& out) {
  out.push_back(window);
  if (budget == 0) return;
  for (std::size_t pos = from; pos + 1 < window.size(); ++pos) {
    EventSymbol saved = window[pos];
    window[pos] = EventSymbol::wildcard();
    collect_candidates(window, pos + 1, budget - 1, out);
    window[pos] = saved;
  }
}

bool matches_at(std::span<const EventSymbol> seq, std::size_t pos,
                const std::vector<EventSymbol>& pattern) {
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    if (!pattern[j].is_wildcard() && pattern[j] != seq[pos + j]) return false;
  }
  return true;
}

Pattern make_pattern(std::vector<EventSymbol> symbols, std::vector<std::size_t> starts,
                     std::size_t n) {
  Pattern p;
  p.support_count = starts.size();
  p.relative_support = static_cast<double>(p.support_count) /
                       static_cast<double>(window_count(n, symbols.size()));
  p.event_support = static_cast<double>(p.support_count) / static_cast<double>(std::max<std::size_t>(n, 1));
  p.symbols = std::move(symbols);
  p.occurrence_starts = std::move(starts);
  return p;
}

// Pseudo-projection entry: `end` is the stream index just past the prefix
// inside database sequence `row`.
struct Entry {
  std::uint32_t row;
  std::uint32_t end;
};

class PrefixGrowth {
 public:
  PrefixGrowth(std::span<const EventSymbol> seq, const MiningParams& params,
               const Deadline* deadline)
      : seq_(seq), params_(params), deadline_(deadline),
        rows_(window_count(seq.size(), params.max_window)),
        widest_windows_(window_count(seq.size(), params.max_window)) {}

  std::vector<Pattern> run() {
    std::map<EventSymbol, std::vector<Entry>> items;
    for (std::size_t row = 0; row < rows_; ++row) {
      for (std::size_t pos = row; pos < row_end(row); ++pos) {
        items[seq_[pos]].push_back({static_cast<std::uint32_t>(row),
                                    static_cast<std::uint32_t>(pos + 1)});
      }
    }
    std::vector<EventSymbol> prefix;
    for (auto& [symbol, entries] : items) {
      prefix.assign(1, symbol);
      grow(prefix, entries, 0);
    }
    sort_canonical(out_);
    return std::move(out_);
  }

 private:
  std::size_t row_end(std::size_t row) const {
    return std::min(row + params_.max_window, seq_.size());
  }

  void grow(std::vector<EventSymbol>& prefix, const std::vector<Entry>& entries,
            std::size_t wildcards) {
    if (deadline_ && (++nodes_ & 0x3FF) == 0) deadline_->check();
    const std::size_t length = prefix.size();
    // The same stream occurrence shows up in several database rows.
    std::vector<std::size_t> starts;
    starts.reserve(entries.size());
    for (const auto& e : entries) starts.push_back(e.end - length);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    const std::size_t count = starts.size();

    if (length >= 2 && !prefix.back().is_wildcard() &&
        exceeds_min_support(count, seq_.size(), length, params_.min_support)) {
      out_.push_back(make_pattern(prefix, std::move(starts), seq_.size()));
    }
    // Extensions keep count <= this count and never have fewer windows than
    // the longest pattern length.
    if (static_cast<double>(count) / static_cast<double>(widest_windows_) <= params_.min_support) {
      return;
    }
    if (length >= params_.max_window) return;

    std::map<EventSymbol, std::vector<Entry>> children;
    for (const auto& e : entries) {
      if (e.end < row_end(e.row)) children[seq_[e.end]].push_back({e.row, e.end + 1});
    }
    for (auto& [symbol, projected] : children) {
      prefix.push_back(symbol);
      grow(prefix, projected, wildcards);
      prefix.pop_back();
    }
    if (wildcards < params_.max_wildcards && length + 1 < params_.max_window) {
      std::vector<Entry> projected;
      for (const auto& e : entries) {
        if (e.end < row_end(e.row)) projected.push_back({e.row, e.end + 1});
      }
      if (!projected.empty()) {
        prefix.push_back(EventSymbol::wildcard());
        grow(prefix, projected, wildcards + 1);
        prefix.pop_back();
      }
    }
  }

  std::span<const EventSymbol> seq_;
  const MiningParams& params_;
  const Deadline* deadline_;
  std::size_t rows_;
  std::size_t widest_windows_;
  std::size_t nodes_ = 0;
  std::vector<Pattern> out_;
};

}  // namespace

std::vector<Pattern> brute_force_mine(std::span<const EventSymbol> seq, const MiningParams& params,
                                      const Deadline* deadline) {
  params.validate();
  const std::size_t n = seq.size();
  if (n < 2) return {};

  std::vector<std::vector<EventSymbol>> candidates;
  std::vector<EventSymbol> window;
  for (std::size_t start = 0; start + 1 < n; ++start) {
    for (std::size_t length = 2; length <= params.max_window && start + length <= n; ++length) {
      window.assign(seq.begin() + start, seq.begin() + start + length);
      collect_candidates(window, 1, length >= 3 ? params.max_wildcards : 0, candidates);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<Pattern> out;
  std::size_t scanned = 0;
  for (auto& candidate : candidates) {
    if (deadline && (++scanned & 0xFF) == 0) deadline->check();
    std::vector<std::size_t> starts;
    for (std::size_t pos = 0; pos + candidate.size() <= n; ++pos) {
      if (matches_at(seq, pos, candidate)) starts.push_back(pos);
    }
    if (exceeds_min_support(starts.size(), n, candidate.size(), params.min_support)) {
      out.push_back(make_pattern(std::move(candidate), std::move(starts), n));
    }
  }
  sort_canonical(out);
  return out;
}

BaselineResult prefix_growth_mine(std::span<const EventSymbol> seq, const MiningParams& params,
                                  const Deadline* deadline) {
  params.validate();
  BaselineResult result;
  result.miner_name = "prefix_growth";
  memory::PeakScope scope;
  auto t0 = std::chrono::steady_clock::now();
  if (seq.size() >= 2) result.patterns = PrefixGrowth(seq, params, deadline).run();
  result.wall_time = std::chrono::steady_clock::now() - t0;
  result.peak_memory = scope.peak_delta();
  return result;
}

}  // namespace shrec
