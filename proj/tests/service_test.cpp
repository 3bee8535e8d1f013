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

#include <fstream>

#include <gtest/gtest.h>

#include "shrec/errors.hpp"
#include "shrec/metrics.hpp"
#include "shrec/serialization.hpp"
#include "shrec/service.hpp"
#include "shrec/store.hpp"
#include "service_support.hpp"

namespace shrec {
namespace {

using namespace shrec::testing;
using std::chrono::hours;
using std::chrono::days;

const std::string kFixtures = SHREC_FIXTURES;

std::vector<Recommendation> load_recs(const std::string& name) {
  std::ifstream in(kFixtures + "/" + name);
  std::vector<Recommendation> recs;
  std::string line;
  while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line).get<Recommendation>());
  return recs;
}

class ServiceTest : public ::testing::Test {
 protected:
  ServiceOptions options() const { return ServiceOptions{.data_dir = dir.path()}; }

  std::unique_ptr<Service> open() { return std::make_unique<Service>(options()); }

  std::vector<Recommendation> ingest_all(Service& s, const std::vector<Event>& events) {
    std::vector<Recommendation> out;
    for (const auto& e : events) {
      auto r = s.ingest(e);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

  TempDir dir;
};

TEST_F(ServiceTest, StoreJournalAndSnapshots) {
  Store store(dir.path() / "raw.db");
  EXPECT_EQ(store.append("H1", "event", "{}"), 1);
  EXPECT_EQ(store.append("H2", "tick", "{\"now\":1}"), 2);
  store.put_snapshot("H1", 1, "state-1");
  store.put_snapshot("H1", 2, "state-2");
  auto snaps = store.snapshots();
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0].state, "state-2");
  auto tail = store.journal(1);
  ASSERT_EQ(tail.size(), 1u);
  EXPECT_EQ(tail[0].kind, "tick");
  EXPECT_EQ(tail[0].home, "H2");
  {
    Store::Transaction tx(store);
    store.append("H1", "event", "{}");
  }  // rolled back
  EXPECT_EQ(store.journal().size(), 2u);
  store.drop_snapshots();
  EXPECT_TRUE(store.snapshots().empty());
}

TEST_F(ServiceTest, IngestEmitsAndPersists) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"));
  auto recs = ingest_all(*s, burst("H1", kDay0 + hours(8)));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "H1-000001");
  EXPECT_EQ(s->recommendations("H1", RecommendationStatus::pending).size(), 1u);
  EXPECT_TRUE(s->recommendations("H1", RecommendationStatus::expired).empty());
  EXPECT_EQ(s->rules("H1").size(), 1u);
  EXPECT_THROW(s->install_home("H1", room_symbols("H1"), room_rules("H1")), ConflictError);
  EXPECT_THROW(s->ingest(room_event("H9", kDay0, 434)), NotFoundError);
  EXPECT_THROW(s->ingest(room_event("H1", kDay0, 434)), OrderingError);
}

TEST_F(ServiceTest, FeedbackIsAtMostOncePerRecommendation) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"));
  auto rec = ingest_all(*s, burst("H1", kDay0 + hours(8))).at(0);
  auto result = s->feedback(rec.id, Vote::useful);
  EXPECT_EQ(result.recommendation.status, RecommendationStatus::accepted_useful);
  EXPECT_EQ(result.rule.feedback_log.size(), 1u);
  EXPECT_THROW(s->feedback(rec.id, Vote::not_useful), ConflictError);
  EXPECT_THROW(s->feedback("H1-999999", Vote::useful), NotFoundError);
  EXPECT_THROW(s->feedback("nohome-000001", Vote::useful), NotFoundError);
  EXPECT_THROW(s->feedback("garbage", Vote::useful), NotFoundError);
}

TEST_F(ServiceTest, TenNegativesRetireTheRule) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"), permissive());
  std::vector<Recommendation> recs;
  for (int i = 0; i < 11; ++i) {
    auto r = ingest_all(*s, burst("H1", kDay0 + hours(i)));
    recs.insert(recs.end(), r.begin(), r.end());
  }
  ASSERT_EQ(recs.size(), 11u);
  for (int i = 0; i < 9; ++i) s->feedback(recs[i].id, Vote::not_useful);
  EXPECT_TRUE(s->rules("H1")[0].active);
  auto last = s->feedback(recs[9].id, Vote::not_useful);
  EXPECT_FALSE(last.rule.active);
  EXPECT_EQ(last.rule.deactivation, Deactivation::negative_streak);
  // A retired rule stops emitting.
  EXPECT_TRUE(ingest_all(*s, burst("H1", kDay0 + hours(20))).empty());
  auto reset = s->admin_reset("H1", last.rule.id);
  EXPECT_TRUE(reset.active);
  EXPECT_EQ(ingest_all(*s, burst("H1", kDay0 + hours(21))).size(), 1u);
  EXPECT_THROW(s->admin_reset("H1", "S9>S9"), NotFoundError);
}

TEST_F(ServiceTest, PendingExpiresAfterADay) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"));
  auto rec = ingest_all(*s, burst("H1", kDay0 + hours(8))).at(0);
  s->tick("H1", rec.created_at + hours(23));
  EXPECT_EQ(s->recommendations("H1", RecommendationStatus::pending).size(), 1u);
  s->tick("H1", rec.created_at + hours(24));
  EXPECT_EQ(s->recommendations("H1", RecommendationStatus::expired).size(), 1u);
  EXPECT_THROW(s->feedback(rec.id, Vote::useful), ConflictError);
}

TEST_F(ServiceTest, TickFiresCompletionTimeout) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"));
  s->ingest(room_event("H1", kDay0 + hours(8), 434));
  s->ingest(room_event("H1", kDay0 + hours(8) + Seconds(60), 424));
  auto recs = s->tick("H1", kDay0 + hours(9));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].created_at, kDay0 + hours(8) + Seconds(360));
}

TEST_F(ServiceTest, BatchCountsRejections) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"));
  auto events = burst("H1", kDay0 + hours(8));
  events.push_back(room_event("H1", kDay0, 434));   // out of order
  events.push_back(room_event("H7", kDay0, 434));   // unknown home
  auto result = s->ingest_batch(events);
  EXPECT_EQ(result.accepted, 3u);
  EXPECT_EQ(result.rejected, 2u);
  EXPECT_EQ(result.recommendations.size(), 1u);
  EXPECT_EQ(s->rebuild_from_journal(), s->snapshot());
}

TEST_F(ServiceTest, RestartRestoresEverything) {
  std::string before;
  {
    auto s = open();
    s->install_home("H1", room_symbols("H1"), room_rules("H1"), permissive());
    s->install_home("H2", room_symbols("H2"), room_rules("H2"));
    auto recs = ingest_all(*s, burst("H1", kDay0 + hours(8)));
    ingest_all(*s, burst("H1", kDay0 + hours(9)));
    ingest_all(*s, burst("H2", kDay0 + hours(9)));
    s->feedback(recs[0].id, Vote::not_useful);
    s->ingest(room_event("H2", kDay0 + hours(10), 434));  // live partial matcher
    before = s->snapshot_dump();
  }
  auto s = open();
  EXPECT_EQ(s->snapshot_dump(), before);
  EXPECT_EQ(s->homes(), (std::vector<std::string>{"H1", "H2"}));
  EXPECT_EQ(s->rules("H1")[0].negative_streak, 1u);
  EXPECT_EQ(s->recommendations(std::nullopt, RecommendationStatus::pending).size(), 2u);
  // The restored partial matcher still completes.
  auto r = s->ingest(room_event("H2", kDay0 + hours(10) + Seconds(60), 424));
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(s->ingest(room_event("H2", kDay0 + hours(10) + Seconds(120), 12)).size(), 0u);  // cooldown
}

TEST_F(ServiceTest, RecoversFromJournalWithoutSnapshots) {
  std::string before;
  {
    auto s = open();
    s->install_home("H1", room_symbols("H1"), room_rules("H1"), permissive());
    for (int i = 0; i < 4; ++i) ingest_all(*s, burst("H1", kDay0 + hours(i)));
    s->feedback("H1-000002", Vote::useful);
    s->tick("H1", kDay0 + days(2));
    before = s->snapshot_dump();
    EXPECT_EQ(s->rebuild_from_journal().dump(), before);
  }
  {
    Store store(dir.path() / "shrec.db");
    store.drop_snapshots();
  }
  auto s = open();
  EXPECT_EQ(s->snapshot_dump(), before);
}

TEST_F(ServiceTest, MetricsOnEmptyStore) {
  auto s = open();
  auto m = s->metrics();
  EXPECT_EQ(m.recommendations_sent, 0u);
  EXPECT_EQ(m.answered, 0u);
  EXPECT_EQ(m.ratio_useful_answered, 0.0);
  EXPECT_EQ(m.recs_per_day_per_home, 0.0);
  EXPECT_EQ(format_percent(m.ratio_useful_answered), "0.00%");
}

TEST_F(ServiceTest, MetricsFromLiveState) {
  auto s = open();
  s->install_home("H1", room_symbols("H1"), room_rules("H1"), permissive());
  std::vector<Recommendation> recs;
  for (int i = 0; i < 4; ++i) {
    auto r = ingest_all(*s, burst("H1", kDay0 + hours(i)));
    recs.insert(recs.end(), r.begin(), r.end());
  }
  s->feedback(recs[0].id, Vote::useful);
  s->feedback(recs[1].id, Vote::not_useful);
  auto m = s->metrics();
  EXPECT_EQ(m.from, kDay0);
  EXPECT_EQ(m.to, kDay0 + days(1));
  EXPECT_EQ(m.recommendations_sent, 4u);
  EXPECT_EQ(m.answered, 2u);
  EXPECT_EQ(m.voted_useful, 1u);
  EXPECT_DOUBLE_EQ(m.ratio_useful_answered, 0.5);
  EXPECT_EQ(m.active_rules, 1u);
  EXPECT_EQ(m.rules_emitting, 1u);
  EXPECT_DOUBLE_EQ(m.recs_per_day_per_home, 4.0);
  EXPECT_EQ(s->metrics(kDay0 + days(1), kDay0 + days(2)).recommendations_sent, 0u);
}

TEST(MetricsTest, PhaseOneFixture) {
  auto recs = load_recs("phase1_recommendations.jsonl");
  auto m = compute_metrics(recs, {}, kDay0, kDay0 + days(14), 8);
  EXPECT_EQ(m.recommendations_sent, 160u);
  EXPECT_EQ(m.answered, 76u);
  EXPECT_EQ(m.voted_useful, 7u);
  EXPECT_EQ(m.voted_not_useful, 69u);
  EXPECT_EQ(m.answered, m.voted_useful + m.voted_not_useful);
  EXPECT_EQ(format_percent(m.ratio_useful_answered), "9.21%");
  EXPECT_EQ(m.rules_emitting, 23u);
  EXPECT_NEAR(m.recs_per_day_per_home, 1.43, 0.005);
}

TEST(MetricsTest, PhaseTwoFixtureExactArithmetic) {
  const Timestamp start{std::chrono::sys_days{std::chrono::year{2014} / 4 / 7}};
  auto recs = load_recs("phase2_recommendations.jsonl");
  auto m = compute_metrics(recs, {}, start, start + days(34), 8);
  EXPECT_EQ(m.recommendations_sent, 120u);
  EXPECT_EQ(m.answered, 55u);
  EXPECT_EQ(m.voted_useful, 5u);
  EXPECT_DOUBLE_EQ(m.ratio_useful_answered, 5.0 / 55.0);
  EXPECT_EQ(format_percent(m.ratio_useful_answered), "9.09%");
  EXPECT_EQ(m.rules_emitting, 17u);
  EXPECT_NEAR(m.recs_per_day_per_home, 0.44, 0.005);
}

TEST(MetricsTest, RuleCounters) {
  std::vector<AssociationRule> rules(5);
  rules[0].active = false;
  rules[0].deactivation = Deactivation::negative_streak;
  rules[1].active = false;
  rules[1].deactivation = Deactivation::low_usefulness;
  auto m = compute_metrics({}, rules, kDay0, kDay0 + days(1), 1);
  EXPECT_EQ(m.active_rules, 3u);
  EXPECT_EQ(m.rules_retired_by_streak, 1u);
}

}  // namespace
}  // namespace shrec
