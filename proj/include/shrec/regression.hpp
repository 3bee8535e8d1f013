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

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace shrec {

/// Explanatory variables of the feedback regression, in design-matrix order.
enum class Feature { confidence = 0, pattern_length = 1, support = 2, action_position = 3 };
inline constexpr std::size_t kFeatureCount = 4;

std::string_view to_string(Feature feature);

struct RuleFeatures {
  double confidence = 0.0;
  double pattern_length = 0.0;
  double support = 0.0;
  double action_position = 0.0;

  double operator[](Feature f) const;
};

struct CoefficientEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;
  bool dropped = false;  // collinear with earlier columns; estimate fixed at 0
};

/// OLS fit of per-rule feedback score on rule features, with intercept.
struct RegressionModel {
  double intercept = 0.0;
  std::array<CoefficientEstimate, kFeatureCount> coefficients{};
  double r_squared = 0.0;
  std::size_t observations = 0;
  std::vector<Feature> dropped;

  double coefficient(Feature f) const { return coefficients[static_cast<std::size_t>(f)].estimate; }
  const CoefficientEstimate& estimate(Feature f) const {
    return coefficients[static_cast<std::size_t>(f)];
  }

  /// Unit weights on confidence and pattern length, zero elsewhere. Used
  /// until enough feedback exists for a fit.
  static RegressionModel unit_defaults();
};

/// Ordinary least squares. Columns that are numerically collinear with the
/// intercept or an earlier feature are dropped and listed in `dropped`.
/// Throws InsufficientDataError for fewer than `min_observations` rows and
/// RankDeficientError when every feature column is dropped or no residual
/// degrees of freedom remain.
RegressionModel fit_regression(std::span<const RuleFeatures> features,
                               std::span<const double> scores, double alpha = 0.05,
                               std::size_t min_observations = 5);

}  // namespace shrec
