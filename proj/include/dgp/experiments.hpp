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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgp/aggregation.hpp"
#include "dgp/dataset.hpp"
#include "dgp/gp_expert.hpp"
#include "dgp/kernel.hpp"

namespace dgp {

/// Exact GP on all rows of `train`.
MomentsBatch full_gp_predict(const Dataset& train, const Hyperparameters& hp,
                             const Eigen::MatrixXd& x_test,
                             VarianceKind kind = VarianceKind::kLatent);

/// Median wall time of `repeats` calls.
double median_seconds(const std::function<void()>& work, int repeats);

/// Median time of one factorized objective+gradient evaluation.
double gradient_eval_seconds(const Partition& partition, const Hyperparameters& hp, int workers,
                             int repeats = 5);

/// Random subset of `size` rows (deterministic in seed).
DataView random_subset(const Dataset& data, std::size_t size, std::uint64_t seed);

struct SodMatch {
  std::size_t subset_size = 0;
  double target_seconds = 0.0;
  double achieved_seconds = 0.0;
  /// Even a single point is slower than the target.
  bool infeasible = false;
};

/// Binary search for the subset size whose full-GP gradient time is within
/// 20% of target_seconds.
SodMatch match_sod_subset_size(const Dataset& train, const Hyperparameters& hp,
                               double target_seconds, std::uint64_t seed, int repeats = 3);

struct TimingRow {
  std::size_t n = 0;
  std::size_t experts = 0;
  double seconds = 0.0;
  std::string status = "ok";
};

/// For each N: M = ceil(N / points_per_expert) experts on synthetic D-dim data,
/// median time of one objective+gradient evaluation. Allocation failures are
/// recorded per row and the sweep continues.
std::vector<TimingRow> timing_sweep(const std::vector<std::size_t>& sizes,
                                    std::size_t points_per_expert, Index dim, int repeats,
                                    int workers, std::uint64_t seed);

/// Least-squares slope of log(seconds) against log(n) over rows with status ok.
double loglog_slope(const std::vector<TimingRow>& rows);

/// 1-D toy study: few experts with two points each, predictions of the full GP
/// and all four aggregation rules on a dense grid.
struct PathologyConfig {
  std::size_t num_experts = 5;
  std::size_t points_per_expert = 2;
  Hyperparameters hp = Hyperparameters::from_natural(1.0, 1.0, 0.1, 1);
  double data_lo = -6.0;
  double data_hi = 6.0;
  double grid_lo = -20.0;
  double grid_hi = 20.0;
  std::size_t grid_points = 801;
  /// Grid points farther than this many lengthscales from every training
  /// input are flagged as far field.
  double far_field_lengthscales = 10.0;
  std::uint64_t seed = 1;
};

struct PathologyCurve {
  std::string model;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // latent
};

struct PathologyResult {
  Dataset data;
  Eigen::VectorXd grid;
  std::vector<bool> far_field;
  double prior_variance = 1.0;
  std::size_t num_experts = 0;
  /// "full", "poe", "gpoe", "bcm", "rbcm" in that order.
  std::vector<PathologyCurve> curves;

  const PathologyCurve& curve(const std::string& model) const;
};

PathologyResult run_pathology(const PathologyConfig& config);

}  // namespace dgp
