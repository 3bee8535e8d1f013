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
#include <random>

#include <gtest/gtest.h>

#include "shrec/errors.hpp"
#include "shrec/regression.hpp"
#include "shrec/rules.hpp"

namespace shrec {
namespace {

// Normal equations solved by Gauss-Jordan elimination; the reference the
// library's QR fit is compared against.
std::vector<double> normal_equations(const std::vector<RuleFeatures>& x, const std::vector<double>& y) {
  const std::size_t p = kFeatureCount + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < x.size(); ++r) {
    double row[kFeatureCount + 1] = {1.0, x[r].confidence, x[r].pattern_length, x[r].support,
                                     x[r].action_position};
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) a[i][j] += row[i] * row[j];
      a[i][p] += row[i] * y[r];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = a[i][p] / a[i][i];
  return beta;
}

struct Synthetic {
  std::vector<RuleFeatures> x;
  std::vector<double> y;
};

Synthetic synthetic(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len(2, 5);
  std::normal_distribution<double> noise(0.0, sigma);
  Synthetic s;
  for (std::size_t i = 0; i < n; ++i) {
    RuleFeatures f{unit(rng), static_cast<double>(len(rng)), unit(rng),
                   static_cast<double>(len(rng))};
    s.x.push_back(f);
    s.y.push_back(2.0 * f.confidence + 0.5 * f.pattern_length + (sigma > 0 ? noise(rng) : 0.0));
  }
  return s;
}

TEST(RegressionTest, MatchesNormalEquations) {
  auto s = synthetic(50, 0.01, 17);
  auto model = fit_regression(s.x, s.y);
  auto beta = normal_equations(s.x, s.y);
  EXPECT_NEAR(model.intercept, beta[0], 1e-8);
  EXPECT_NEAR(model.coefficient(Feature::confidence), beta[1], 1e-8);
  EXPECT_NEAR(model.coefficient(Feature::pattern_length), beta[2], 1e-8);
  EXPECT_NEAR(model.coefficient(Feature::support), beta[3], 1e-8);
  EXPECT_NEAR(model.coefficient(Feature::action_position), beta[4], 1e-8);
  EXPECT_EQ(model.observations, 50u);
  EXPECT_GT(model.r_squared, 0.99);
}

TEST(RegressionTest, RecoversKnownCoefficients) {
  auto s = synthetic(50, 0.01, 17);
  auto model = fit_regression(s.x, s.y);
  EXPECT_NEAR(model.coefficient(Feature::confidence), 2.0, 0.05);
  EXPECT_NEAR(model.coefficient(Feature::pattern_length), 0.5, 0.05);
  EXPECT_NEAR(model.coefficient(Feature::support), 0.0, 0.05);
  EXPECT_NEAR(model.coefficient(Feature::action_position), 0.0, 0.05);
  EXPECT_TRUE(model.estimate(Feature::confidence).significant);
  EXPECT_TRUE(model.estimate(Feature::pattern_length).significant);
}

TEST(RegressionTest, ExactDataExactRecovery) {
  auto s = synthetic(20, 0.0, 5);
  auto model = fit_regression(s.x, s.y);
  EXPECT_NEAR(model.coefficient(Feature::confidence), 2.0, 1e-9);
  EXPECT_NEAR(model.coefficient(Feature::pattern_length), 0.5, 1e-9);
  EXPECT_NEAR(model.coefficient(Feature::support), 0.0, 1e-9);
  EXPECT_NEAR(model.coefficient(Feature::action_position), 0.0, 1e-9);
  EXPECT_NEAR(model.intercept, 0.0, 1e-9);
}

TEST(RegressionTest, IdenticalFeaturesAreRankDeficient) {
  std::vector<RuleFeatures> x(10, RuleFeatures{0.5, 3, 0.02, 3});
  std::vector<double> y(10);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i % 2);
  EXPECT_THROW(fit_regression(x, y), RankDeficientError);
}

TEST(RegressionTest, CollinearColumnIsDropped) {
  auto s = synthetic(40, 0.01, 3);
  for (auto& f : s.x) f.action_position = f.pattern_length;
  auto model = fit_regression(s.x, s.y);
  EXPECT_TRUE(model.estimate(Feature::action_position).dropped);
  EXPECT_EQ(model.dropped, std::vector<Feature>{Feature::action_position});
  EXPECT_DOUBLE_EQ(model.coefficient(Feature::action_position), 0.0);
  EXPECT_NEAR(model.coefficient(Feature::pattern_length), 0.5, 0.05);
}

TEST(RegressionTest, TooFewObservations) {
  auto s = synthetic(4, 0.01, 3);
  EXPECT_THROW(fit_regression(s.x, s.y), InsufficientDataError);
  std::vector<double> short_y(3);
  EXPECT_THROW(fit_regression(s.x, short_y), ValidationError);
}

TEST(RegressionTest, FitsRuleFeedback) {
  std::vector<AssociationRule> rules;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    AssociationRule r;
    r.id = "r" + std::to_string(i);
    r.confidence = (i % 10) / 10.0;
    r.pattern_length = 2 + i % 4;
    r.action_position = r.pattern_length;
    r.relative_support = 0.01 * (1 + rng() % 7);
    int useful = static_cast<int>(r.confidence * 10);
    for (int k = 0; k < 10; ++k) r.feedback_log.push_back(k < useful ? Vote::useful : Vote::not_useful);
    rules.push_back(r);
  }
  rules.push_back(AssociationRule{});  // no feedback: ignored
  auto model = fit_feedback_regression(rules);
  EXPECT_EQ(model.observations, 30u);
  EXPECT_NEAR(model.coefficient(Feature::confidence), 2.0, 1e-9);
  EXPECT_TRUE(model.estimate(Feature::action_position).dropped);
}

}  // namespace
}  // namespace shrec
