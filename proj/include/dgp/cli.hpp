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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgp/aggregation.hpp"
#include "dgp/dataset.hpp"
#include "dgp/gp_expert.hpp"
#include "dgp/kernel.hpp"
#include "dgp/trainer.hpp"

namespace dgp::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataFailure = 3, kNumericalFailure = 4 };

/// Entry point shared by the `dgp` binary and the tests. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Data sources are file paths (CSV or binary cache) or synthetic generators
/// written as "synthetic:<name>:<n>[:<seed>[:<noise>]]" with name one of
/// arm (8-D robot-arm distance), gp1d (1-D GP sample, l = 1, s^2 = 1) or
/// sine (noise-free sin x on [0, 2 pi]).
Dataset load_source(const std::string& source, const TargetColumn& target);

TargetColumn parse_target(const std::string& text);

/// Settings shared by the train / predict / sod commands.
struct ExperimentConfig {
  std::string data;
  std::string target = "-1";
  std::size_t num_experts = 1;
  std::string graph = "flat";
  std::string rule = "rbcm";
  std::string test;
  double test_fraction = 0.0;
  bool normalize = true;
  TrainingConfig training;
  std::string out;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for bad rule names or graph/expert
  /// mismatches and DataError for missing input files.
  void validate() const;
};

/// Reproducible model artifact written by `train`.
struct ModelFile {
  Hyperparameters hp;  // in normalized units when normalization is present
  std::size_t num_experts = 1;
  std::uint64_t partition_seed = 0;
  std::string graph = "flat";
  Rule rule = Rule::kRBCM;
  std::string data_source;
  std::string target = "-1";
  std::optional<NormalizationStats> normalization;
  std::string status;
  std::size_t line_searches = 0;
  double final_lml = 0.0;
};

nlohmann::json to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// Predictions on the original (de-normalized) target scale.
struct ModelPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd latent_variance;
  Eigen::VectorXd observation_variance;
};

/// Refits the experts described by `model` on `train` (raw units) and predicts
/// at raw test inputs.
ModelPrediction predict_with_model(const ModelFile& model, const Dataset& train,
                                   const Eigen::MatrixXd& test_inputs, int workers);

struct MetricsReport {
  double rmse = 0.0;
  double nlpd = 0.0;
  std::size_t nlpd_floored = 0;
  double train_seconds = 0.0;
  double gradient_eval_seconds = 0.0;
  double predict_seconds = 0.0;
  nlohmann::json config;
};

nlohmann::json to_json(const MetricsReport& report);

}  // namespace dgp::cli
