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

#include "shrec/service.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

#include "shrec/errors.hpp"
#include "shrec/serialization.hpp"

namespace shrec {

using nlohmann::json;

namespace {

json optional_ts(const std::optional<Timestamp>& ts) {
  return ts ? json(format_iso8601(*ts)) : json(nullptr);
}

std::optional<Timestamp> read_optional_ts(const json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_iso8601(j.get<std::string>());
}

}  // namespace

struct Service::Home {
  Home(std::string id_, Engine engine_, RuleSet rules_, Seconds expiry_)
      : id(std::move(id_)), engine(std::move(engine_)), rules(std::move(rules_)), expiry(expiry_) {}

  std::string id;
  Engine engine;
  RuleSet rules;
  std::vector<Recommendation> recs;  // creation order
  std::map<std::string, std::size_t, std::less<>> rec_index;
  std::optional<Timestamp> first_event;
  std::optional<Timestamp> clock;
  Seconds expiry;
  std::int64_t applied_seq = 0;
  std::mutex mutex;

  static std::unique_ptr<Home> install(const std::string& id, const json& payload,
                                       const ServiceOptions& options) {
    RuleSet rules(options.retirement_threshold);
    std::vector<AssociationRule> list;
    for (const auto& r : payload.at("rules")) {
      auto rule = r.get<AssociationRule>();
      rule.home_id = id;
      rules.insert(rule);
      list.push_back(std::move(rule));
    }
    Engine engine(id, symbol_table_from_json(payload.at("symbols")),
                  payload.at("policy").get<EmissionPolicy>());
    engine.set_rules(list);
    return std::make_unique<Home>(id, std::move(engine), std::move(rules),
                                  options.recommendation_expiry);
  }

  static std::unique_ptr<Home> restore(const json& state, const ServiceOptions& options) {
    RuleSet rules(state.at("retirement_threshold").get<std::size_t>());
    for (const auto& r : state.at("rules")) rules.insert(r.get<AssociationRule>());
    auto home = std::make_unique<Home>(state.at("home").get<std::string>(),
                                       Engine::from_state_json(state.at("engine")),
                                       std::move(rules), options.recommendation_expiry);
    for (const auto& r : state.at("recommendations")) home->add(r.get<Recommendation>());
    home->first_event = read_optional_ts(state.at("first_event"));
    home->clock = read_optional_ts(state.at("clock"));
    return home;
  }

  json to_json() const {
    json recs_json = json::array();
    for (const auto& r : recs) recs_json.push_back(r);
    json rules_json = json::array();
    for (const auto& r : rules.rules()) rules_json.push_back(r);
    return json{{"home", id},
                {"engine", engine.state_json()},
                {"rules", rules_json},
                {"recommendations", recs_json},
                {"first_event", optional_ts(first_event)},
                {"clock", optional_ts(clock)},
                {"retirement_threshold", rules.retirement_threshold()}};
  }

  void add(Recommendation rec) {
    rec_index.emplace(rec.id, recs.size());
    recs.push_back(std::move(rec));
  }

  void advance_clock(Timestamp now) {
    clock = std::max(clock.value_or(now), now);
    for (auto& rec : recs) {
      if (rec.status == RecommendationStatus::pending && *clock - rec.created_at >= expiry) {
        rec.status = RecommendationStatus::expired;
      }
    }
  }

  std::vector<Recommendation> apply_event(const Event& event) {
    auto emitted = engine.step(event);
    if (!first_event) first_event = event.timestamp;
    for (const auto& r : emitted) add(r);
    advance_clock(event.timestamp);
    return emitted;
  }

  std::vector<Recommendation> apply_tick(Timestamp now) {
    auto emitted = engine.on_timeout(now);
    for (const auto& r : emitted) add(r);
    advance_clock(now);
    return emitted;
  }

  FeedbackResult apply_feedback(std::string_view rec_id, Vote vote) {
    auto it = rec_index.find(rec_id);
    if (it == rec_index.end()) throw NotFoundError("unknown recommendation " + std::string(rec_id));
    Recommendation& rec = recs[it->second];
    if (rec.status != RecommendationStatus::pending) {
      throw ConflictError("recommendation " + rec.id + " is already " +
                          std::string(to_string(rec.status)));
    }
    const AssociationRule& rule = rules.apply_feedback(rec.rule_id, vote);
    engine.update_rule(rule);
    rec.status = vote == Vote::useful ? RecommendationStatus::accepted_useful
                                      : RecommendationStatus::rejected_not_useful;
    return FeedbackResult{rec, rule};
  }

  AssociationRule apply_reset(const std::string& rule_id) {
    const AssociationRule& rule = rules.admin_reset(rule_id);
    engine.update_rule(rule);
    return rule;
  }

  // Journal replay entry point; `kind` values mirror the Service mutations.
  void apply(std::string_view kind, const json& payload) {
    if (kind == "event") {
      apply_event(payload.get<Event>());
    } else if (kind == "tick") {
      apply_tick(*parse_iso8601(payload.at("now").get<std::string>()));
    } else if (kind == "feedback") {
      apply_feedback(payload.at("rec").get<std::string>(),
                     *vote_from_string(payload.at("vote").get<std::string>()));
    } else if (kind == "reset") {
      apply_reset(payload.at("rule").get<std::string>());
    } else {
      throw FormatError("unknown journal entry kind " + std::string(kind));
    }
  }
};

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  store_ = std::make_unique<Store>(options_.data_dir / "shrec.db");
  for (const auto& snap : store_->snapshots()) {
    auto home = Home::restore(json::parse(snap.state), options_);
    home->applied_seq = snap.seq;
    homes_[snap.home] = std::move(home);
  }
  std::map<std::string, bool> replayed;
  for (const auto& entry : store_->journal()) {
    auto it = homes_.find(entry.home);
    if (it != homes_.end() && entry.seq <= it->second->applied_seq) continue;
    json payload = json::parse(entry.payload);
    if (entry.kind == "install") {
      homes_[entry.home] = Home::install(entry.home, payload, options_);
    } else if (it == homes_.end()) {
      throw FormatError("journal entry " + std::to_string(entry.seq) + " for unknown home");
    } else {
      it->second->apply(entry.kind, payload);
    }
    homes_[entry.home]->applied_seq = entry.seq;
    replayed[entry.home] = true;
  }
  for (const auto& [id, _] : replayed) {
    Home& h = *homes_[id];
    store_->put_snapshot(id, h.applied_seq, h.to_json().dump());
    spdlog::info("recovered home {} from journal up to entry {}", id, h.applied_seq);
  }
}

Service::~Service() = default;

Service::Home& Service::home(const std::string& id) const {
  std::shared_lock lock(homes_mutex_);
  auto it = homes_.find(id);
  if (it == homes_.end()) throw NotFoundError("unknown home " + id);
  return *it->second;
}

void Service::persist(Home& h, std::string_view kind, const json& payload) {
  Store::Transaction tx(*store_);
  h.applied_seq = store_->append(h.id, kind, payload.dump());
  store_->put_snapshot(h.id, h.applied_seq, h.to_json().dump());
  tx.commit();
}

void Service::install_home(const std::string& id, const SymbolTable& symbols,
                           std::span<const AssociationRule> rules, const EmissionPolicy& policy) {
  json rules_json = json::array();
  for (const auto& r : rules) rules_json.push_back(r);
  json payload{{"symbols", symbols}, {"rules", rules_json}, {"policy", policy}};
  std::unique_lock lock(homes_mutex_);
  if (homes_.count(id)) throw ConflictError("home " + id + " already installed");
  auto home = Home::install(id, payload, options_);
  std::lock_guard home_lock(home->mutex);
  persist(*home, "install", payload);
  homes_[id] = std::move(home);
}

std::vector<Recommendation> Service::ingest(const Event& event) {
  Home& h = home(event.home_id);
  std::lock_guard lock(h.mutex);
  auto emitted = h.apply_event(event);
  persist(h, "event", json(event));
  return emitted;
}

BatchResult Service::ingest_batch(std::span<const Event> events) {
  BatchResult result;
  std::map<std::string, std::vector<const Event*>> by_home;
  for (const auto& e : events) by_home[e.home_id].push_back(&e);
  for (const auto& [id, list] : by_home) {
    Home* h = nullptr;
    try {
      h = &home(id);
    } catch (const NotFoundError&) {
      result.rejected += list.size();
      continue;
    }
    std::lock_guard lock(h->mutex);
    Store::Transaction tx(*store_);
    bool any = false;
    for (const Event* e : list) {
      try {
        auto emitted = h->apply_event(*e);
        result.recommendations.insert(result.recommendations.end(), emitted.begin(),
                                      emitted.end());
      } catch (const Error& err) {
        spdlog::warn("rejected event for {}: {}", id, err.what());
        ++result.rejected;
        continue;
      }
      h->applied_seq = store_->append(id, "event", json(*e).dump());
      ++result.accepted;
      any = true;
    }
    if (any) store_->put_snapshot(id, h->applied_seq, h->to_json().dump());
    tx.commit();
  }
  return result;
}

std::vector<Recommendation> Service::tick(const std::string& id, Timestamp now) {
  Home& h = home(id);
  std::lock_guard lock(h.mutex);
  auto emitted = h.apply_tick(now);
  persist(h, "tick", json{{"now", format_iso8601(now)}});
  return emitted;
}

FeedbackResult Service::feedback(const std::string& recommendation_id, Vote vote) {
  auto dash = recommendation_id.rfind('-');
  if (dash == std::string::npos || !has_home(recommendation_id.substr(0, dash))) {
    throw NotFoundError("unknown recommendation " + recommendation_id);
  }
  Home& h = home(recommendation_id.substr(0, dash));
  std::lock_guard lock(h.mutex);
  auto result = h.apply_feedback(recommendation_id, vote);
  persist(h, "feedback", json{{"rec", recommendation_id}, {"vote", to_string(vote)}});
  return result;
}

AssociationRule Service::admin_reset(const std::string& id, const std::string& rule_id) {
  Home& h = home(id);
  std::lock_guard lock(h.mutex);
  auto rule = h.apply_reset(rule_id);
  persist(h, "reset", json{{"rule", rule_id}});
  return rule;
}

std::vector<std::string> Service::homes() const {
  std::shared_lock lock(homes_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : homes_) out.push_back(id);
  return out;
}

bool Service::has_home(const std::string& id) const {
  std::shared_lock lock(homes_mutex_);
  return homes_.count(id) > 0;
}

EmissionPolicy Service::policy(const std::string& id) const {
  Home& h = home(id);
  std::lock_guard lock(h.mutex);
  return h.engine.policy();
}

std::vector<Recommendation> Service::recommendations(
    const std::optional<std::string>& home_filter,
    const std::optional<RecommendationStatus>& status) const {
  std::vector<Recommendation> out;
  for (const auto& id : homes()) {
    if (home_filter && *home_filter != id) continue;
    Home& h = home(id);
    std::lock_guard lock(h.mutex);
    for (const auto& r : h.recs) {
      if (!status || r.status == *status) out.push_back(r);
    }
  }
  return out;
}

std::vector<AssociationRule> Service::rules(const std::optional<std::string>& home_filter) const {
  std::vector<AssociationRule> out;
  for (const auto& id : homes()) {
    if (home_filter && *home_filter != id) continue;
    Home& h = home(id);
    std::lock_guard lock(h.mutex);
    auto list = h.rules.rules();
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

MetricsSnapshot Service::metrics(std::optional<Timestamp> from, std::optional<Timestamp> to) const {
  std::vector<Recommendation> recs;
  std::vector<AssociationRule> rule_list;
  std::optional<Timestamp> first, last;
  auto ids = homes();
  for (const auto& id : ids) {
    Home& h = home(id);
    std::lock_guard lock(h.mutex);
    recs.insert(recs.end(), h.recs.begin(), h.recs.end());
    auto list = h.rules.rules();
    rule_list.insert(rule_list.end(), list.begin(), list.end());
    if (h.first_event) first = first ? std::min(*first, *h.first_event) : *h.first_event;
    if (h.clock) last = last ? std::max(*last, *h.clock) : *h.clock;
  }
  Timestamp window_from = from ? *from : (first ? day_floor(*first) : Timestamp{});
  Timestamp window_to =
      to ? *to : (last ? day_floor(*last) + std::chrono::days(1) : window_from);
  return compute_metrics(recs, rule_list, window_from, window_to, ids.size());
}

json Service::snapshot() const {
  json homes_json = json::object();
  for (const auto& id : homes()) {
    Home& h = home(id);
    std::lock_guard lock(h.mutex);
    homes_json[id] = h.to_json();
  }
  return json{{"homes", homes_json}};
}

json Service::rebuild_from_journal() const {
  std::map<std::string, std::unique_ptr<Home>> rebuilt;
  for (const auto& entry : store_->journal()) {
    json payload = json::parse(entry.payload);
    if (entry.kind == "install") {
      rebuilt[entry.home] = Home::install(entry.home, payload, options_);
    } else {
      rebuilt.at(entry.home)->apply(entry.kind, payload);
    }
  }
  json homes_json = json::object();
  for (const auto& [id, h] : rebuilt) homes_json[id] = h->to_json();
  return json{{"homes", homes_json}};
}

}  // namespace shrec
