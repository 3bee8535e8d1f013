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

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shrec/engine.hpp"
#include "shrec/metrics.hpp"
#include "shrec/rules.hpp"
#include "shrec/store.hpp"

namespace shrec {

struct ServiceOptions {
  std::filesystem::path data_dir = "shrec-data";
  std::size_t retirement_threshold = kDefaultRetirementThreshold;
  Seconds recommendation_expiry{std::chrono::hours(24)};
};

struct FeedbackResult {
  Recommendation recommendation;
  AssociationRule rule;
};

struct BatchResult {
  std::vector<Recommendation> recommendations;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Owns every home's rules, engine and recommendations. Each mutation is
/// applied in memory, then journaled together with the home's new snapshot
/// in one store transaction. Mutations of one home are serialized; homes
/// are independent.
class Service {
 public:
  /// Opens (or creates) `<data_dir>/shrec.db` and restores all homes from
  /// their snapshots plus the journal tail.
  explicit Service(ServiceOptions options);
  ~Service();

  /// Throws ConflictError when the home exists.
  void install_home(const std::string& home, const SymbolTable& symbols,
                    std::span<const AssociationRule> rules, const EmissionPolicy& policy = {});

  /// Throws NotFoundError (unknown home), OrderingError or ValidationError.
  std::vector<Recommendation> ingest(const Event& event);
  /// Events of one or more homes; rejected events are skipped and counted.
  BatchResult ingest_batch(std::span<const Event> events);
  /// Advances a home's clock: fires completion timeouts and expires stale
  /// pending recommendations.
  std::vector<Recommendation> tick(const std::string& home, Timestamp now);
  /// Throws NotFoundError (unknown recommendation) or ConflictError (already
  /// answered or expired).
  FeedbackResult feedback(const std::string& recommendation_id, Vote vote);
  AssociationRule admin_reset(const std::string& home, const std::string& rule_id);

  std::vector<std::string> homes() const;
  bool has_home(const std::string& home) const;
  EmissionPolicy policy(const std::string& home) const;
  std::vector<Recommendation> recommendations(
      const std::optional<std::string>& home = std::nullopt,
      const std::optional<RecommendationStatus>& status = std::nullopt) const;
  std::vector<AssociationRule> rules(const std::optional<std::string>& home = std::nullopt) const;
  /// Defaults to the civil days spanned by the ingested events.
  MetricsSnapshot metrics(std::optional<Timestamp> from = std::nullopt,
                          std::optional<Timestamp> to = std::nullopt) const;

  /// Complete state of every home, sorted keys.
  nlohmann::json snapshot() const;
  std::string snapshot_dump() const { return snapshot().dump(); }

  /// Rebuilds all state from the journal alone, ignoring stored snapshots,
  /// and returns it in snapshot() form.
  nlohmann::json rebuild_from_journal() const;

  const ServiceOptions& options() const { return options_; }

  struct Home;

 private:
  Home& home(const std::string& id) const;
  void persist(Home& h, std::string_view kind, const nlohmann::json& payload);

  ServiceOptions options_;
  std::unique_ptr<Store> store_;
  mutable std::shared_mutex homes_mutex_;
  std::map<std::string, std::unique_ptr<Home>> homes_;
};

}  // namespace shrec
