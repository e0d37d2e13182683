/*
 * Copyright 2026 The dgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "dgp/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgp {

namespace {

void check_sizes(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw std::invalid_argument("metrics: prediction and target sizes differ");
  if (a == 0) throw std::invalid_argument("metrics: no points");
}

}  // namespace

double rmse(const Eigen::VectorXd& mean, const Eigen::VectorXd& targets) {
  check_sizes(mean.size(), targets.size());
  return std::sqrt((mean - targets).squaredNorm() / static_cast<double>(mean.size()));
}

NlpdResult nlpd(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                const Eigen::VectorXd& targets) {
  check_sizes(mean.size(), targets.size());
  check_sizes(variance.size(), targets.size());
  NlpdResult out;
  double total = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    double var = variance(i);
    if (!(var >= kNlpdVarianceFloor)) {
      var = kNlpdVarianceFloor;
      ++out.floored;
    }
    const double r = targets(i) - mean(i);
    total += 0.5 * std::log(2.0 * std::numbers::pi * var) + r * r / (2.0 * var);
  }
  out.value = total / static_cast<double>(mean.size());
  return out;
}

}  // namespace dgp
