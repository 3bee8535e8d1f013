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

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "shrec/engine.hpp"
#include "shrec/events.hpp"
#include "shrec/rules.hpp"
#include "shrec/service.hpp"

namespace shrec::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("shrec-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline const Timestamp kDay0{std::chrono::sys_days{std::chrono::year{2014} / 3 / 3}};

// Scenes of the living room: a = 434, b = 424, off = 0, d = 12.
inline Event room_event(const std::string& home, Timestamp ts, std::int64_t scene) {
  return Event{ts, home, "Z3", "living room", "D17", scene, 381, DeviceGroup::lighting};
}

inline SymbolTable room_symbols(const std::string& home) {
  EventLog log{home, {}};
  for (std::int64_t scene : {434, 424, 0, 12}) log.events.push_back(room_event(home, kDay0, scene));
  return symbolize(log).table;
}

/// (a, b) -> off, the only rule.
inline std::vector<AssociationRule> room_rules(const std::string& home) {
  AssociationRule r;
  r.home_id = home;
  r.antecedent = {EventSymbol{1}, EventSymbol{2}};
  r.consequent = EventSymbol{3};
  r.id = rule_id_for(r.antecedent, r.consequent);
  r.confidence = 0.7;
  r.pattern_length = 3;
  r.action_position = 3;
  r.weight = 3.7;
  return {r};
}

/// One recommendation-producing burst (a, b, d) starting at `t`.
inline std::vector<Event> burst(const std::string& home, Timestamp t) {
  return {room_event(home, t, 434), room_event(home, t + Seconds(60), 424),
          room_event(home, t + Seconds(120), 12)};
}

/// A policy that lets every burst through.
inline EmissionPolicy permissive() {
  EmissionPolicy p;
  p.per_rule_cooldown = Seconds(1);
  p.per_home_daily_cap = 1000;
  return p;
}

}  // namespace shrec::testing
