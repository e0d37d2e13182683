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

#include "dgp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>

#include <json.hpp>
#include <omp.h>

#include "dgp/errors.hpp"
#include "dgp/gp_expert.hpp"
#include "dgp/lbfgs.hpp"

namespace dgp {

int default_workers() { return omp_get_max_threads(); }

void TrainingConfig::validate() const {
  if (!(gradient_tolerance > 0.0)) {
    throw std::invalid_argument("training: gradient tolerance must be positive");
  }
  if (lbfgs_memory < 1) throw std::invalid_argument("training: L-BFGS memory must be >= 1");
}

namespace {

void check_partition(const Partition& partition, const Hyperparameters& hp) {
  if (partition.views.empty()) throw std::invalid_argument("objective: no experts");
  for (std::size_t k = 0; k < partition.views.size(); ++k) {
    if (partition.views[k].size() == 0) {
      throw std::invalid_argument("objective: expert " + std::to_string(k) + " has no data");
    }
    if (partition.views[k].dim() != hp.dim()) {
      throw std::invalid_argument("objective: data dimension does not match hyperparameters");
    }
  }
}

LmlWithGradient expert_term(const DataView& view, const Hyperparameters& hp) {
  return lml_and_gradient(fit(view, hp));
}

ObjectiveValue reduce_terms(const std::vector<LmlWithGradient>& terms, Index size) {
  ObjectiveValue out{0.0, Eigen::VectorXd::Zero(size)};
  for (const auto& t : terms) {
    out.lml += t.value;
    out.gradient += t.gradient;
  }
  return out;
}

}  // namespace

ObjectiveValue objective_and_gradient_serial(const Partition& partition,
                                             const Hyperparameters& hp) {
  check_partition(partition, hp);
  std::vector<LmlWithGradient> terms;
  terms.reserve(partition.views.size());
  for (std::size_t k = 0; k < partition.views.size(); ++k) {
    try {
      terms.push_back(expert_term(partition.views[k], hp));
    } catch (const NumericalError& e) {
      throw ExpertError(k, e.what());
    }
  }
  return reduce_terms(terms, hp.size());
}

ObjectiveValue objective_and_gradient(const Partition& partition, const Hyperparameters& hp,
                                      int workers) {
  check_partition(partition, hp);
  if (workers <= 0) workers = default_workers();
  const auto m = static_cast<std::ptrdiff_t>(partition.views.size());
  std::vector<LmlWithGradient> terms(static_cast<std::size_t>(m));

  std::size_t failed = partition.views.size();
  std::string failure;
  std::mutex lock;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    try {
      terms[static_cast<std::size_t>(k)] =
          expert_term(partition.views[static_cast<std::size_t>(k)], hp);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> guard(lock);
      if (static_cast<std::size_t>(k) < failed) {
        failed = static_cast<std::size_t>(k);
        failure = e.what();
      }
    }
  }
  if (failed < partition.views.size()) throw ExpertError(failed, failure);
  return reduce_terms(terms, hp.size());
}

Hyperparameters heuristic_init(const Dataset& data) {
  if (data.size() < 2) throw std::invalid_argument("heuristic_init: need at least 2 rows");
  const Index d = data.dim();
  Eigen::VectorXd log_ell(d);
  for (Index j = 0; j < d; ++j) {
    const auto col = data.inputs().col(j).array();
    const double sd = std::sqrt((col - col.mean()).square().mean());
    log_ell(j) = sd > 0.0 ? std::log(sd) : 0.0;
  }
  const auto y = data.targets().array();
  const double var = std::max((y - y.mean()).square().mean(), 1e-6);
  return Hyperparameters(std::log(var), std::move(log_ell), std::log(0.1 * std::sqrt(var)));
}

std::string_view status_name(TrainingStatus status) {
  switch (status) {
    case TrainingStatus::kConverged: return "converged";
    case TrainingStatus::kBudget: return "budget";
    case TrainingStatus::kLineSearchFailed: return "line_search_failed";
  }
  return "?";
}

void TrainingTrace::write_jsonl(std::ostream& out) const {
  for (const auto& e : entries) {
    out << nlohmann::json{{"iteration", e.iteration},
                          {"lml", e.lml},
                          {"grad_norm", e.grad_norm},
                          {"elapsed_seconds", e.elapsed_seconds}}
                .dump()
        << '\n';
  }
}

TrainingResult train(const Partition& partition, const TrainingConfig& config) {
  config.validate();
  if (partition.views.empty()) throw std::invalid_argument("train: no experts");
  const Hyperparameters init =
      config.init ? *config.init : heuristic_init(partition.views.front().source());
  const int workers = config.workers > 0 ? config.workers : default_workers();

  // The optimizer minimizes -LML. Infeasible points (factorization failure)
  // are reported as +inf so that the line search backs off.
  const optim::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const Hyperparameters hp = Hyperparameters::from_vector(x);
    try {
      const ObjectiveValue v = objective_and_gradient(partition, hp, workers);
      grad = -v.gradient;
      return -v.lml;
    } catch (const NumericalError&) {
      grad.setConstant(std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::infinity();
    }
  };

  TrainingResult result{init, {}};
  if (config.max_line_searches == 0) {
    result.trace.status = TrainingStatus::kBudget;
    return result;
  }

  optim::LbfgsOptions options;
  options.memory = config.lbfgs_memory;
  options.max_iterations = config.max_line_searches;
  options.gradient_tolerance = config.gradient_tolerance;

  const auto start = std::chrono::steady_clock::now();
  const auto on_iteration = [&](const optim::IterationRecord& r) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    result.trace.entries.push_back({r.iteration, -r.value, r.gradient_norm, elapsed.count()});
  };
  optim::LbfgsResult opt;
  try {
    opt = optim::minimize(objective, init.to_vector(), options, on_iteration);
  } catch (const std::invalid_argument&) {
    throw NumericalError("train: objective is not finite at the initial hyperparameters");
  }
  result.hp = Hyperparameters::from_vector(opt.x);
  result.trace.evaluations = opt.evaluations;
  switch (opt.status) {
    case optim::LbfgsStatus::kConverged: result.trace.status = TrainingStatus::kConverged; break;
    case optim::LbfgsStatus::kBudget: result.trace.status = TrainingStatus::kBudget; break;
    case optim::LbfgsStatus::kLineSearchFailed:
      result.trace.status = TrainingStatus::kLineSearchFailed;
      break;
  }
  return result;
}

TrainingResult train(const Dataset& data, std::size_t num_experts, const TrainingConfig& config) {
  const Partition partition = random_partition(data, num_experts, config.seed);
  return train(partition, config);
}

}  // namespace dgp
