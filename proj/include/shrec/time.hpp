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
#include <optional>
#include <string>
#include <string_view>

namespace shrec {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Parses `YYYY-MM-DDTHH:MM:SS` followed by `Z` or a `+HH:MM`/`-HH:MM`
/// offset. A space is accepted in place of `T`. Fractional seconds are
/// truncated. The result is normalized to UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp ts);

/// Midnight UTC of the civil day containing `ts`.
inline Timestamp day_floor(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts);
}

inline double to_seconds(Timestamp ts) {
  return static_cast<double>(ts.time_since_epoch().count());
}

}  // namespace shrec
