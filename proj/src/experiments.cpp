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

#include "dgp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <new>
#include <numeric>
#include <stdexcept>

#include "dgp/comp_graph.hpp"
#include "dgp/random.hpp"
#include "dgp/synthetic.hpp"
#include "dgp/trainer.hpp"

namespace dgp {

MomentsBatch full_gp_predict(const Dataset& train, const Hyperparameters& hp,
                             const Eigen::MatrixXd& x_test, VarianceKind kind) {
  return predict(fit(DataView(train), hp), x_test, kind);
}

double median_seconds(const std::function<void()>& work, int repeats) {
  if (repeats < 1) throw std::invalid_argument("median_seconds: repeats must be >= 1");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    times.push_back(elapsed.count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  return times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
}

double gradient_eval_seconds(const Partition& partition, const Hyperparameters& hp, int workers,
                             int repeats) {
  return median_seconds([&] { (void)objective_and_gradient(partition, hp, workers); }, repeats);
}

DataView random_subset(const Dataset& data, std::size_t size, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.size());
  if (size == 0 || size > n) {
    throw std::invalid_argument("random_subset: size must be in [1, N]");
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(order));
  order.resize(size);
  return DataView(data, std::move(order));
}

namespace {

double full_gp_gradient_seconds(const Dataset& train, const Hyperparameters& hp,
                                std::size_t size, std::uint64_t seed, int repeats) {
  const DataView view = random_subset(train, size, seed);
  return median_seconds([&] { (void)lml_and_gradient(fit(view, hp)); }, repeats);
}

}  // namespace

SodMatch match_sod_subset_size(const Dataset& train, const Hyperparameters& hp,
                               double target_seconds, std::uint64_t seed, int repeats) {
  SodMatch match;
  match.target_seconds = target_seconds;
  const auto n = static_cast<std::size_t>(train.size());
  const auto time_of = [&](std::size_t size) {
    return full_gp_gradient_seconds(train, hp, size, seed, repeats);
  };
  const auto within = [&](double t) { return std::abs(t - target_seconds) <= 0.2 * target_seconds; };

  const double t_min = time_of(1);
  if (t_min > 1.2 * target_seconds) {
    match.subset_size = 1;
    match.achieved_seconds = t_min;
    match.infeasible = true;
    return match;
  }
  // Grow geometrically so the expensive large subsets are only timed when needed.
  // Invariant: time(lo) <= target < time(hi).
  std::size_t lo = 1;
  double t_lo = t_min;
  std::size_t hi = 0;
  for (std::size_t size = std::min<std::size_t>(n, 64); hi == 0; size = std::min(n, size * 2)) {
    const double t = time_of(size);
    if (within(t)) {
      match.subset_size = size;
      match.achieved_seconds = t;
      return match;
    }
    if (t > target_seconds) {
      hi = size;
    } else if (size == n) {
      match.subset_size = n;
      match.achieved_seconds = t;
      return match;
    } else {
      lo = size;
      t_lo = t;
    }
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double t = time_of(mid);
    if (within(t)) {
      match.subset_size = mid;
      match.achieved_seconds = t;
      return match;
    }
    if (t < target_seconds) {
      lo = mid;
      t_lo = t;
    } else {
      hi = mid;
    }
  }
  match.subset_size = lo;
  match.achieved_seconds = t_lo;
  return match;
}

std::vector<TimingRow> timing_sweep(const std::vector<std::size_t>& sizes,
                                    std::size_t points_per_expert, Index dim, int repeats,
                                    int workers, std::uint64_t seed) {
  if (points_per_expert == 0) throw std::invalid_argument("timing: points per expert must be > 0");
  const Hyperparameters hp = Hyperparameters::from_natural(1.0, 1.0, 0.1, dim);
  std::vector<TimingRow> rows;
  for (const std::size_t n : sizes) {
    TimingRow row;
    row.n = n;
    row.experts = (n + points_per_expert - 1) / points_per_expert;
    try {
      Rng rng(seed + n);
      const auto rows_n = static_cast<Index>(n);
      Eigen::MatrixXd x(rows_n, dim);
      Eigen::VectorXd y(rows_n);
      for (Index i = 0; i < rows_n; ++i) {
        double s = 0.0;
        for (Index d = 0; d < dim; ++d) {
          x(i, d) = rng.uniform(-2.0, 2.0);
          s += std::sin(x(i, d));
        }
        y(i) = s + 0.1 * rng.normal();
      }
      const Dataset data(std::move(x), std::move(y));
      const Partition partition = random_partition(data, row.experts, seed);
      row.seconds = gradient_eval_seconds(partition, hp, workers, repeats);
    } catch (const std::bad_alloc&) {
      row.status = "out_of_memory";
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<TimingRow>& rows) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (r.status != "ok" || r.seconds <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(r.n)));
    ys.push_back(std::log(r.seconds));
  }
  if (xs.size() < 2) throw std::invalid_argument("loglog_slope: need at least two timed rows");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

const PathologyCurve& PathologyResult::curve(const std::string& model) const {
  for (const auto& c : curves) {
    if (c.model == model) return c;
  }
  throw std::out_of_range("pathology: no curve named " + model);
}

PathologyResult run_pathology(const PathologyConfig& config) {
  if (config.hp.dim() != 1) throw std::invalid_argument("pathology: needs 1-D hyperparameters");
  if (config.grid_points < 2) throw std::invalid_argument("pathology: need at least 2 grid points");
  const std::size_t n = config.num_experts * config.points_per_expert;

  PathologyResult result;
  result.data = synthetic::sample_gp(n, config.hp, config.data_lo, config.data_hi, config.seed);
  result.num_experts = config.num_experts;
  result.prior_variance = config.hp.signal_variance();
  result.grid = Eigen::VectorXd::LinSpaced(static_cast<Index>(config.grid_points), config.grid_lo,
                                           config.grid_hi);
  const Eigen::MatrixXd x_grid = result.grid;

  const double far = config.far_field_lengthscales * config.hp.lengthscale(0);
  result.far_field.resize(config.grid_points);
  for (Index g = 0; g < result.grid.size(); ++g) {
    const double dist = (result.data.inputs().col(0).array() - result.grid(g)).abs().minCoeff();
    result.far_field[static_cast<std::size_t>(g)] = dist > far;
  }

  const MomentsBatch full = full_gp_predict(result.data, config.hp, x_grid);
  result.curves.push_back({"full", full.mean, full.variance});

  const Partition partition = random_partition(result.data, config.num_experts, config.seed);
  for (const Rule rule : {Rule::kPoE, Rule::kGPoE, Rule::kBCM, Rule::kRBCM}) {
    std::vector<ExpertState> experts;
    for (const auto& view : partition.views) experts.push_back(fit(view, config.hp));
    const ComputationGraph graph = build_graph(GraphSpec::flat(), std::move(experts), rule);
    const GraphPrediction pred = predict_graph(graph, x_grid);
    result.curves.push_back({std::string(rule_name(rule)), pred.mean, pred.variance});
  }
  return result;
}

}  // namespace dgp
