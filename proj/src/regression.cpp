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

#include "shrec/regression.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <string>

#include "shrec/errors.hpp"

namespace shrec {

namespace {

constexpr double kCollinearTolerance = 1e-9;

}  // namespace

std::string_view to_string(Feature feature) {
  switch (feature) {
    case Feature::confidence:
      return "confidence";
    case Feature::pattern_length:
      return "pattern_length";
    case Feature::support:
      return "support";
    case Feature::action_position:
      return "action_position";
  }
  return "?";
}

double RuleFeatures::operator[](Feature f) const {
  switch (f) {
    case Feature::confidence:
      return confidence;
    case Feature::pattern_length:
      return pattern_length;
    case Feature::support:
      return support;
    case Feature::action_position:
      return action_position;
  }
  return 0.0;
}

RegressionModel RegressionModel::unit_defaults() {
  RegressionModel model;
  model.coefficients[static_cast<std::size_t>(Feature::confidence)].estimate = 1.0;
  model.coefficients[static_cast<std::size_t>(Feature::pattern_length)].estimate = 1.0;
  return model;
}

RegressionModel fit_regression(std::span<const RuleFeatures> features,
                               std::span<const double> scores, double alpha,
                               std::size_t min_observations) {
  if (features.size() != scores.size()) {
    throw ValidationError("feature and score counts differ");
  }
  const auto n = static_cast<Eigen::Index>(features.size());
  if (features.size() < min_observations) {
    throw InsufficientDataError("regression needs at least " + std::to_string(min_observations) +
                                " rules with feedback, got " + std::to_string(features.size()));
  }

  // Greedy column selection: keep a column only if its component orthogonal
  // to the columns already kept is not negligible.
  Eigen::MatrixXd basis(n, 0);
  std::vector<Eigen::Index> kept;  // -1 = intercept, otherwise feature index
  RegressionModel model;
  model.observations = features.size();
  for (Eigen::Index col = -1; col < static_cast<Eigen::Index>(kFeatureCount); ++col) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = col < 0 ? 1.0 : features[static_cast<std::size_t>(i)][static_cast<Feature>(col)];
    }
    const double norm = v.norm();
    Eigen::VectorXd residual = v;
    for (Eigen::Index b = 0; b < basis.cols(); ++b) {
      residual -= basis.col(b).dot(residual) * basis.col(b);
    }
    if (norm == 0.0 || residual.norm() <= kCollinearTolerance * norm) {
      if (col >= 0) {
        model.dropped.push_back(static_cast<Feature>(col));
        model.coefficients[static_cast<std::size_t>(col)].dropped = true;
      }
      continue;
    }
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = residual / residual.norm();
    kept.push_back(col);
  }
  if (model.dropped.size() == kFeatureCount) {
    throw RankDeficientError("every explanatory column is constant or collinear");
  }
  const auto p = static_cast<Eigen::Index>(kept.size());
  if (n <= p) throw RankDeficientError("no residual degrees of freedom");

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = scores[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      x(i, j) = kept[j] < 0 ? 1.0
                            : features[static_cast<std::size_t>(i)][static_cast<Feature>(kept[j])];
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd residual = y - x * beta;
  const double rss = residual.squaredNorm();
  const double df = static_cast<double>(n - p);
  const double sigma2 = rss / df;
  Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv = r.inverse();
  Eigen::MatrixXd cov = sigma2 * (r_inv * r_inv.transpose());

  const double mean_y = y.mean();
  const double tss = (y.array() - mean_y).square().sum();
  model.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;

  boost::math::students_t dist(df);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (kept[j] < 0) {
      model.intercept = beta[j];
      continue;
    }
    auto& c = model.coefficients[static_cast<std::size_t>(kept[j])];
    c.estimate = beta[j];
    c.std_error = std::sqrt(std::max(cov(j, j), 0.0));
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(c.t_stat)));
    } else {
      // Exact fit: any nonzero coefficient is as certain as it gets.
      c.t_stat = c.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, c.estimate);
      c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    c.significant = c.p_value < alpha;
  }
  return model;
}

}  // namespace shrec
