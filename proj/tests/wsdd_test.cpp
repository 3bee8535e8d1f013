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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "shrec/errors.hpp"
#include "shrec/wsdd.hpp"
#include "test_support.hpp"

namespace shrec {
namespace {

using testing::minute_ticks;
using testing::syms;

const MinedPattern* find(const MiningResult& result, const std::vector<EventSymbol>& symbols) {
  for (const auto& m : result) {
    if (m.pattern.symbols == symbols) return &m;
  }
  return nullptr;
}

MiningParams params(std::size_t window, double support, std::size_t wildcards = 0) {
  MiningParams p;
  p.max_window = window;
  p.min_support = support;
  p.max_wildcards = wildcards;
  return p;
}

TEST(MineTest, AlternatingPairs) {
  auto seq = syms("ababab");
  auto result = mine(seq, minute_ticks(seq.size()), params(2, 0.0));
  ASSERT_EQ(result.size(), 2u);
  EXPECT_EQ(find(result, syms("ab"))->pattern.support_count, 3u);
  EXPECT_EQ(find(result, syms("ba"))->pattern.support_count, 2u);
  EXPECT_EQ(find(result, syms("ab"))->pattern.occurrence_starts,
            (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_DOUBLE_EQ(find(result, syms("ab"))->pattern.relative_support, 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(find(result, syms("ab"))->pattern.event_support, 3.0 / 6.0);
}

TEST(MineTest, LengthThreeCounts) {
  auto seq = syms("ababab");
  auto result = mine(seq, minute_ticks(seq.size()), params(3, 0.0));
  EXPECT_EQ(find(result, syms("aba"))->pattern.support_count, 2u);
  EXPECT_EQ(find(result, syms("bab"))->pattern.support_count, 2u);
  EXPECT_EQ(result.size(), 4u);
}

TEST(MineTest, EmptyAndSingleton) {
  EXPECT_TRUE(mine({}, {}, MiningParams{}).empty());
  auto one = syms("a");
  EXPECT_TRUE(mine(one, minute_ticks(1), params(3, 0.0)).empty());
}

TEST(MineTest, OverlappingOccurrencesCountOncePerStart) {
  auto seq = syms("aaaa");
  auto result = mine(seq, minute_ticks(seq.size()), params(3, 0.0));
  EXPECT_EQ(find(result, syms("aa"))->pattern.support_count, 3u);
  EXPECT_EQ(find(result, syms("aaa"))->pattern.support_count, 2u);
}

TEST(MineTest, MinSupportIsStrict) {
  // (a,b) occurs in 2 of 4 windows: relative support exactly 0.5.
  auto seq = syms("abab" "c");
  auto ts = minute_ticks(seq.size());
  EXPECT_NE(find(mine(seq, ts, params(2, 0.49)), syms("ab")), nullptr);
  EXPECT_EQ(find(mine(seq, ts, params(2, 0.5)), syms("ab")), nullptr);
  EXPECT_TRUE(mine(seq, ts, params(2, 1.0)).empty());
}

TEST(MineTest, WildcardedExample) {
  auto seq = syms("axaya");
  auto ts = minute_ticks(seq.size());
  auto result = mine_wildcarded(seq, ts, params(3, 0.0, 1));
  EXPECT_EQ(find(result, syms("a*a"))->pattern.support_count, 2u);
  EXPECT_EQ(find(result, syms("axa"))->pattern.support_count, 1u);
  EXPECT_EQ(find(result, syms("aya"))->pattern.support_count, 1u);
  EXPECT_EQ(find(result, syms("*a")), nullptr);
  for (const auto& m : result) {
    EXPECT_FALSE(m.pattern.symbols.front().is_wildcard());
    EXPECT_FALSE(m.pattern.symbols.back().is_wildcard());
  }
}

TEST(MineTest, ZeroWildcardsMatchesPlainMine) {
  std::mt19937_64 rng(3);
  auto seq = testing::random_sequence(rng, 300, 6);
  auto ts = minute_ticks(seq.size());
  auto a = testing::to_count_map(mine(seq, ts, params(4, 0.0)));
  auto b = testing::to_count_map(mine_wildcarded(seq, ts, params(4, 0.0, 0)));
  EXPECT_EQ(a, b);
}

TEST(MineTest, MatchesReferenceCounter) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 30; ++round) {
    auto seq = testing::random_sequence(rng, 50 + rng() % 200, 2 + rng() % 6);
    auto ts = minute_ticks(seq.size());
    const std::size_t window = 2 + rng() % 4;
    const std::size_t wild = rng() % 3;
    const double support = (rng() % 3) * 0.01;
    auto got = testing::to_count_map(mine(seq, ts, params(window, support, wild)));
    EXPECT_EQ(got, testing::reference_counts(seq, window, wild, support)) << "round " << round;
  }
}

TEST(MineTest, InvariantsHold) {
  std::mt19937_64 rng(5);
  auto seq = testing::random_sequence(rng, 400, 4);
  auto result = mine(seq, minute_ticks(seq.size()), params(5, 0.0, 2));
  for (const auto& m : result) {
    const auto& p = m.pattern;
    EXPECT_GE(p.length(), 2u);
    EXPECT_EQ(p.support_count, p.occurrence_starts.size());
    EXPECT_TRUE(std::is_sorted(p.occurrence_starts.begin(), p.occurrence_starts.end()));
    EXPECT_TRUE(std::adjacent_find(p.occurrence_starts.begin(), p.occurrence_starts.end()) ==
                p.occurrence_starts.end());
    EXPECT_DOUBLE_EQ(p.relative_support,
                     static_cast<double>(p.support_count) / (seq.size() - p.length() + 1));
    EXPECT_LE(p.wildcard_positions().size(), 2u);
  }
}

TEST(MineTest, CanonicalOrder) {
  std::mt19937_64 rng(9);
  auto seq = testing::random_sequence(rng, 500, 5);
  auto result = mine(seq, minute_ticks(seq.size()), params(4, 0.0, 1));
  for (std::size_t i = 1; i < result.size(); ++i) {
    const auto& a = result[i - 1].pattern;
    const auto& b = result[i].pattern;
    bool ordered = a.support_count > b.support_count ||
                   (a.support_count == b.support_count &&
                    (a.length() < b.length() || (a.length() == b.length() && a.symbols < b.symbols)));
    EXPECT_TRUE(ordered) << i;
  }
}

TEST(MineTest, ParameterValidation) {
  auto seq = syms("abab");
  auto ts = minute_ticks(seq.size());
  EXPECT_THROW(mine(seq, ts, params(1, 0.0)), ValidationError);
  EXPECT_THROW(mine(seq, ts, params(3, 1.5)), ValidationError);
  EXPECT_THROW(mine(seq, ts, params(3, -0.1)), ValidationError);
  ts.pop_back();
  EXPECT_THROW(mine(seq, ts, params(3, 0.0)), ValidationError);
  auto backwards = minute_ticks(seq.size());
  std::swap(backwards[0], backwards[3]);
  EXPECT_THROW(mine(seq, backwards, params(3, 0.0)), ValidationError);
}

TEST(MineTest, ExpiredDeadlineThrows) {
  std::mt19937_64 rng(1);
  auto seq = testing::random_sequence(rng, 5000, 10);
  Deadline past{std::chrono::steady_clock::now() - std::chrono::seconds(1)};
  EXPECT_THROW(mine(seq, minute_ticks(seq.size()), params(5, 0.0), &past), TimeoutError);
}

TEST(PeriodicityTest, ConstantInterval) {
  auto base = minute_ticks(1)[0];
  std::vector<Timestamp> t{base, base + Seconds(100), base + Seconds(200), base + Seconds(300)};
  auto info = periodicity(t, 0.15);
  EXPECT_TRUE(info.is_periodic);
  EXPECT_DOUBLE_EQ(*info.mean_interval, 100.0);
  EXPECT_DOUBLE_EQ(*info.interval_cv, 0.0);
}

TEST(PeriodicityTest, IrregularInterval) {
  auto base = minute_ticks(1)[0];
  std::vector<Timestamp> t{base, base + Seconds(50), base + Seconds(300)};
  // Intervals 50 and 250: mean 150, population deviation 100.
  const double mean = (50.0 + 250.0) / 2.0;
  const double sd = std::sqrt(((50.0 - mean) * (50.0 - mean) + (250.0 - mean) * (250.0 - mean)) / 2.0);
  auto info = periodicity(t, 0.15);
  EXPECT_FALSE(info.is_periodic);
  EXPECT_DOUBLE_EQ(*info.mean_interval, 150.0);
  EXPECT_NEAR(*info.interval_cv, sd / mean, 1e-12);
  EXPECT_NEAR(*info.interval_cv, 0.6666666666666666, 1e-12);
}

TEST(PeriodicityTest, TooFewOccurrences) {
  auto base = minute_ticks(1)[0];
  EXPECT_FALSE(periodicity(std::vector<Timestamp>{base}, 0.15).is_periodic);
  EXPECT_FALSE(periodicity(std::vector<Timestamp>{base, base + Seconds(60)}, 0.15).is_periodic);
  EXPECT_FALSE(periodicity(std::vector<Timestamp>{}, 0.15).is_periodic);
}

TEST(PeriodicityTest, MinedPatternsCarryPeriodicity) {
  // (a,b) every 4 events, one minute apart: intervals of exactly 240 s.
  auto seq = syms("abcdabcdabcdabcd");
  auto result = mine(seq, minute_ticks(seq.size()), params(2, 0.0));
  const auto* ab = find(result, syms("ab"));
  ASSERT_NE(ab, nullptr);
  EXPECT_TRUE(ab->periodicity.is_periodic);
  EXPECT_DOUBLE_EQ(*ab->periodicity.mean_interval, 240.0);
}

TEST(PatternsJsonlTest, RoundTrip) {
  auto seq = syms("abcabcab");
  auto result = mine_wildcarded(seq, minute_ticks(seq.size()), params(3, 0.0, 1));
  std::stringstream buf;
  write_patterns_jsonl(buf, result);
  auto back = read_patterns_jsonl(buf);
  ASSERT_EQ(back.size(), result.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].pattern.symbols, result[i].pattern.symbols);
    EXPECT_EQ(back[i].pattern.support_count, result[i].pattern.support_count);
    EXPECT_DOUBLE_EQ(back[i].pattern.relative_support, result[i].pattern.relative_support);
    EXPECT_EQ(back[i].periodicity.is_periodic, result[i].periodicity.is_periodic);
  }
  std::istringstream bad("{\"pattern\": [\"Q1\"]}\n");
  EXPECT_THROW(read_patterns_jsonl(bad), FormatError);
}

}  // namespace
}  // namespace shrec
