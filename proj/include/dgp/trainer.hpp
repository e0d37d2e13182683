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
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dgp/dataset.hpp"
#include "dgp/kernel.hpp"

namespace dgp {

/// Number of OpenMP threads to use when the caller passes workers <= 0.
int default_workers();

struct TrainingConfig {
  std::size_t max_line_searches = 100;
  double gradient_tolerance = 1e-5;
  std::size_t lbfgs_memory = 10;
  /// Starting point; heuristic_init() when empty.
  std::optional<Hyperparameters> init;
  /// Seed of the random expert assignment.
  std::uint64_t seed = 0;
  int workers = 0;

  void validate() const;
};

/// Factorized objective: sum over experts of the exact per-expert LML, and
/// the matching sum of gradients (log-domain hyperparameter layout).
struct ObjectiveValue {
  double lml = 0.0;
  Eigen::VectorXd gradient;
};

/// One task per expert on an OpenMP team; per-expert results are reduced in
/// expert order, so the value does not depend on the schedule. A failing
/// expert aborts the evaluation with ExpertError.
ObjectiveValue objective_and_gradient(const Partition& partition, const Hyperparameters& hp,
                                      int workers = 0);

/// Single-threaded reference for objective_and_gradient.
ObjectiveValue objective_and_gradient_serial(const Partition& partition,
                                             const Hyperparameters& hp);

/// Lengthscales = per-dimension population std of the inputs (1 for constant
/// columns), s^2 = target variance (floored at 1e-6), sigma_e = 0.1 * s.
Hyperparameters heuristic_init(const Dataset& data);

enum class TrainingStatus { kConverged, kBudget, kLineSearchFailed };
std::string_view status_name(TrainingStatus status);

struct TraceEntry {
  std::size_t iteration = 0;
  double lml = 0.0;
  double grad_norm = 0.0;
  double elapsed_seconds = 0.0;
};

struct TrainingTrace {
  std::vector<TraceEntry> entries;
  TrainingStatus status = TrainingStatus::kBudget;
  std::size_t evaluations = 0;

  /// One JSON object per line: {"iteration", "lml", "grad_norm", "elapsed_seconds"}.
  void write_jsonl(std::ostream& out) const;
};

struct TrainingResult {
  Hyperparameters hp;
  TrainingTrace trace;
};

/// Maximizes the factorized LML over one shared hyperparameter set with
/// L-BFGS. Experts are refit at every evaluation.
TrainingResult train(const Partition& partition, const TrainingConfig& config);

/// Convenience overload: random_partition(data, num_experts, config.seed).
TrainingResult train(const Dataset& data, std::size_t num_experts, const TrainingConfig& config);

}  // namespace dgp
