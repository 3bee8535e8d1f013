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

// Process-wide heap accounting. Linking this library replaces the global
// operator new/delete with versions that keep live and peak byte counts.
namespace shrec::memory {

std::size_t current_bytes();
std::size_t peak_bytes();
/// Resets the peak to the current live byte count.
void reset_peak();

/// Peak heap growth observed between construction and peak_delta().
/// Only meaningful when one measured operation runs at a time.
class PeakScope {
 public:
  PeakScope();
  std::size_t peak_delta() const;

 private:
  std::size_t baseline_;
};

constexpr double kMiB = 1024.0 * 1024.0;

}  // namespace shrec::memory
