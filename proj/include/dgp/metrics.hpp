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

#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace dgp {

double rmse(const Eigen::VectorXd& mean, const Eigen::VectorXd& targets);

inline constexpr double kNlpdVarianceFloor = 1e-12;

struct NlpdResult {
  double value = 0.0;
  /// Points whose variance was raised to kNlpdVarianceFloor.
  std::size_t floored = 0;
};

/// Mean over points of 1/2 log(2 pi s^2) + (y - mu)^2 / (2 s^2).
NlpdResult nlpd(const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                const Eigen::VectorXd& targets);

}  // namespace dgp
