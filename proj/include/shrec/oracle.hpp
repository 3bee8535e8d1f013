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
#include <span>
#include <string>
#include <vector>

#include "shrec/wsdd.hpp"

namespace shrec {

struct BaselineResult {
  std::vector<Pattern> patterns;  // canonical order
  std::string miner_name;
  std::chrono::nanoseconds wall_time{0};
  std::size_t peak_memory = 0;  // bytes of heap growth during the call
};

/// Ground truth. First loop collects every window instantiation as a
/// candidate; second loop scans the whole sequence once per distinct
/// candidate and records each matching start. Same contract as mine().
std::vector<Pattern> brute_force_mine(std::span<const EventSymbol> seq, const MiningParams& params,
                                      const Deadline* deadline = nullptr);

/// Generic projected-database prefix growth. The stream is cut into a
/// database of overlapping max_window-sized sequences, the way a general
/// purpose sequence miner would consume it; prefixes grow one symbol at a
/// time over pseudo-projections and the per-sequence hits are folded back
/// into distinct stream positions to get the support count.
BaselineResult prefix_growth_mine(std::span<const EventSymbol> seq, const MiningParams& params,
                                  const Deadline* deadline = nullptr);

}  // namespace shrec
