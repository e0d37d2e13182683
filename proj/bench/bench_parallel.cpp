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

// Serial references against their OpenMP counterparts. The worker count is
// the benchmark argument.

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "dgp/comp_graph.hpp"
#include "dgp/synthetic.hpp"
#include "dgp/trainer.hpp"

namespace {

using namespace dgp;

// Partitions view their dataset by reference, so the dataset lives at a fixed
// address for the whole run.
struct Setup {
  Setup()
      : data(synthetic::robot_arm(16384, 1)),
        partition(random_partition(data, 32, 1)),
        hp(Hyperparameters::from_natural(1.0, 1.5, 0.1, data.dim())),
        x_test(synthetic::robot_arm(4096, 2).inputs()) {
    std::vector<ExpertState> experts;
    for (const auto& v : partition.views) experts.push_back(fit(v, hp));
    graph = std::make_unique<ComputationGraph>(
        build_graph(GraphSpec::parse("4-8"), std::move(experts), Rule::kRBCM));
  }

  Dataset data;
  Partition partition;
  Hyperparameters hp;
  Eigen::MatrixXd x_test;
  std::unique_ptr<ComputationGraph> graph;
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_ObjectiveSerial(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_gradient_serial(s.partition, s.hp));
}
BENCHMARK(BM_ObjectiveSerial)->Unit(benchmark::kMillisecond);

void BM_ObjectiveParallel(benchmark::State& state) {
  const Setup& s = setup();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(objective_and_gradient(s.partition, s.hp, workers));
}
BENCHMARK(BM_ObjectiveParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_PredictSerial(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(predict_graph(*s.graph, s.x_test));
}
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);

void BM_PredictParallel(benchmark::State& state) {
  const Setup& s = setup();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(execute_parallel(*s.graph, s.x_test, workers));
}
BENCHMARK(BM_PredictParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
