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

#include <memory>
#include <optional>
#include <string>

#include "shrec/service.hpp"

namespace shrec {

struct ApiOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// When set, every route except /api/health requires
  /// `Authorization: Bearer <token>`.
  std::optional<std::string> token;
};

/// JSON over HTTP for the dashboard:
///
///   GET  /api/health
///   GET  /api/recommendations?home=&status=
///   POST /api/recommendations/{id}/feedback   {"vote": "useful" | "not_useful"}
///   GET  /api/rules?home=
///   POST /api/homes/{home}/rules/{rule}/reset
///   GET  /api/metrics?from=&to=               dates or ISO-8601 instants
///   POST /api/events                          one event or an array
///   POST /api/homes                           {"home", "symbols", "rules", "policy"}
///   POST /api/homes/{home}/tick               {"now"}
///
/// Errors are `{"error": "..."}` with 401, 404, 409 or 422.
class ApiServer {
 public:
  ApiServer(Service& service, ApiOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  /// Throws IoError when the address cannot be bound.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shrec
