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
#include <functional>

#include <Eigen/Core>

namespace dgp::optim {

/// Value-and-gradient callback for minimization. Returning a non-finite value
/// marks the point as infeasible; the line search then backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& gradient)>;

struct LbfgsOptions {
  std::size_t memory = 10;
  /// Budget of line searches (outer iterations).
  std::size_t max_iterations = 100;
  /// Stop when the max-norm of the gradient falls to this level.
  double gradient_tolerance = 1e-5;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature (strong Wolfe)
  std::size_t max_evaluations_per_search = 25;
};

enum class LbfgsStatus { kConverged, kBudget, kLineSearchFailed };

struct IterationRecord {
  std::size_t iteration = 0;
  double value = 0.0;
  double gradient_norm = 0.0;  // max-norm
  std::size_t evaluations = 0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  LbfgsStatus status = LbfgsStatus::kBudget;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic
/// zoom). On line-search failure the best point seen so far is returned.
/// `on_iteration` is called for the starting point (iteration 0) and after
/// each accepted step.
LbfgsResult minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options,
                     const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace dgp::optim
