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

#include "dgp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <numbers>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "dgp/comp_graph.hpp"
#include "dgp/errors.hpp"
#include "dgp/experiments.hpp"
#include "dgp/metrics.hpp"
#include "dgp/random.hpp"
#include "dgp/synthetic.hpp"

namespace dgp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Data sources

TargetColumn parse_target(const std::string& text) {
  long index = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec == std::errc() && ptr == text.data() + text.size()) return index;
  return text;
}

namespace {

constexpr std::string_view kSyntheticPrefix = "synthetic:";

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

bool is_synthetic(const std::string& source) { return source.starts_with(kSyntheticPrefix); }

}  // namespace

Dataset load_source(const std::string& source, const TargetColumn& target) {
  if (!is_synthetic(source)) return load_dataset(source, target);
  const auto parts = split(source.substr(kSyntheticPrefix.size()), ':');
  if (parts.size() < 2 || parts.size() > 4) {
    throw std::invalid_argument("synthetic source '" + source +
                                "': expected synthetic:<name>:<n>[:<seed>[:<noise>]]");
  }
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double noise = -1.0;
  try {
    n = std::stoul(parts[1]);
    if (parts.size() > 2) seed = std::stoull(parts[2]);
    if (parts.size() > 3) noise = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw std::invalid_argument("synthetic source '" + source + "': bad number");
  }
  const std::string& name = parts[0];
  if (name == "arm") return synthetic::robot_arm(n, seed, noise < 0.0 ? 0.1 : noise);
  if (name == "gp1d") {
    const auto hp = Hyperparameters::from_natural(1.0, 1.0, noise < 0.0 ? 0.1 : noise, 1);
    return synthetic::sample_gp(n, hp, -10.0, 10.0, seed);
  }
  if (name == "sine") return synthetic::sinusoid(n, 0.0, 2.0 * std::numbers::pi, seed);
  throw std::invalid_argument("synthetic source '" + source + "': unknown generator '" + name +
                              "' (arm, gp1d, sine)");
}

void ExperimentConfig::validate() const {
  (void)parse_rule(rule);
  GraphSpec::parse(graph).validate(num_experts);
  if (data.empty()) throw std::invalid_argument("no data source given (--data)");
  if (!is_synthetic(data) && !fs::exists(data)) throw DataError("data file not found: " + data);
  if (!test.empty() && !is_synthetic(test) && !fs::exists(test)) {
    throw DataError("test file not found: " + test);
  }
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("--test-fraction must be in [0, 1)");
  }
  training.validate();
}

// ---------------------------------------------------------------------------
// Model file

namespace {

json stats_to_json(const NormalizationStats& s) {
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
  return json{{"feature_mean", vec(s.feature_mean)},
              {"feature_scale", vec(s.feature_scale)},
              {"feature_constant", s.feature_constant},
              {"target_mean", s.target_mean},
              {"target_scale", s.target_scale},
              {"target_constant", s.target_constant}};
}

NormalizationStats stats_from_json(const json& j) {
  const auto vec = [](const json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
  };
  NormalizationStats s;
  s.feature_mean = vec(j.at("feature_mean"));
  s.feature_scale = vec(j.at("feature_scale"));
  s.feature_constant = j.at("feature_constant").get<std::vector<bool>>();
  s.target_mean = j.at("target_mean").get<double>();
  s.target_scale = j.at("target_scale").get<double>();
  s.target_constant = j.at("target_constant").get<bool>();
  return s;
}

}  // namespace

json to_json(const ModelFile& model) {
  json j{{"format", "dgp-model"},
         {"version", 1},
         {"hyperparameters", model.hp},
         {"num_experts", model.num_experts},
         {"partition_seed", model.partition_seed},
         {"graph", model.graph},
         {"rule", std::string(rule_name(model.rule))},
         {"data", {{"source", model.data_source}, {"target", model.target}}},
         {"normalization", model.normalization ? stats_to_json(*model.normalization) : json()},
         {"training",
          {{"status", model.status},
           {"line_searches", model.line_searches},
           {"final_lml", model.final_lml}}}};
  return j;
}

ModelFile model_from_json(const json& j) {
  if (j.value("format", "") != "dgp-model") throw DataError("not a dgp model file");
  ModelFile m;
  m.hp = j.at("hyperparameters").get<Hyperparameters>();
  m.num_experts = j.at("num_experts").get<std::size_t>();
  m.partition_seed = j.at("partition_seed").get<std::uint64_t>();
  m.graph = j.at("graph").get<std::string>();
  m.rule = parse_rule(j.at("rule").get<std::string>());
  m.data_source = j.at("data").at("source").get<std::string>();
  m.target = j.at("data").at("target").get<std::string>();
  if (!j.at("normalization").is_null()) m.normalization = stats_from_json(j.at("normalization"));
  const json& t = j.at("training");
  m.status = t.at("status").get<std::string>();
  m.line_searches = t.at("line_searches").get<std::size_t>();
  m.final_lml = t.at("final_lml").get<double>();
  return m;
}

void save_model(const fs::path& path, const ModelFile& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

ModelFile load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path.string());
  try {
    return model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError("model " + path.string() + ": " + e.what());
  }
}

ModelPrediction predict_with_model(const ModelFile& model, const Dataset& train,
                                   const Eigen::MatrixXd& test_inputs, int workers) {
  if (test_inputs.cols() != train.dim()) {
    throw DataError("test data has " + std::to_string(test_inputs.cols()) +
                    " features, model expects " + std::to_string(train.dim()));
  }
  const Dataset train_n = model.normalization ? model.normalization->apply(train) : train;
  Eigen::MatrixXd x_test = test_inputs;
  if (model.normalization) {
    const auto& s = *model.normalization;
    x_test = (x_test.rowwise() - s.feature_mean.transpose()).array().rowwise() /
             s.feature_scale.transpose().array();
  }
  const Partition partition = random_partition(train_n, model.num_experts, model.partition_seed);
  std::vector<ExpertState> experts(partition.views.size(), fit(partition.views.front(), model.hp));
  {
    std::size_t failed = experts.size();
    std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t k = 1; k < static_cast<std::ptrdiff_t>(experts.size()); ++k) {
      try {
        experts[static_cast<std::size_t>(k)] =
            fit(partition.views[static_cast<std::size_t>(k)], model.hp);
      } catch (const std::exception& e) {
#pragma omp critical
        if (static_cast<std::size_t>(k) < failed) {
          failed = static_cast<std::size_t>(k);
          failure = e.what();
        }
      }
    }
    if (failed < experts.size()) throw ExpertError(failed, failure);
  }
  const ComputationGraph graph =
      build_graph(GraphSpec::parse(model.graph), std::move(experts), model.rule);
  const GraphPrediction pred = execute_parallel(graph, x_test, workers);

  ModelPrediction out;
  const Eigen::VectorXd obs = (pred.variance.array() + model.hp.noise_variance()).matrix();
  if (model.normalization) {
    out.mean = model.normalization->denormalize_targets(pred.mean);
    out.latent_variance = model.normalization->denormalize_variances(pred.variance);
    out.observation_variance = model.normalization->denormalize_variances(obs);
  } else {
    out.mean = pred.mean;
    out.latent_variance = pred.variance;
    out.observation_variance = obs;
  }
  return out;
}

json to_json(const MetricsReport& report) {
  return json{{"rmse", report.rmse},
              {"nlpd", report.nlpd},
              {"nlpd_floored_points", report.nlpd_floored},
              {"train_seconds", report.train_seconds},
              {"gradient_eval_seconds", report.gradient_eval_seconds},
              {"predict_seconds", report.predict_seconds},
              {"config", report.config}};
}

// ---------------------------------------------------------------------------
// Commands

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::string absolute_source(const std::string& source) {
  if (is_synthetic(source)) return source;
  return fs::absolute(source).lexically_normal().string();
}

json echo(const ExperimentConfig& c) {
  return json{{"data", c.data},
              {"target", c.target},
              {"num_experts", c.num_experts},
              {"graph", c.graph},
              {"rule", c.rule},
              {"test", c.test},
              {"test_fraction", c.test_fraction},
              {"normalize", c.normalize},
              {"seed", c.seed},
              {"max_line_searches", c.training.max_line_searches},
              {"gradient_tolerance", c.training.gradient_tolerance},
              {"lbfgs_memory", c.training.lbfgs_memory}};
}

// Holds out a random fraction of rows as test data.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double fraction,
                                          std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.size());
  const auto n_test = static_cast<std::size_t>(std::round(fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) throw std::invalid_argument("--test-fraction leaves no data");
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  rng.shuffle(std::span<Index>(order));
  const std::vector<Index> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<Index> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  const DataView test(data, test_rows);
  const DataView train(data, train_rows);
  return {Dataset(train.gather_inputs(), train.gather_targets()),
          Dataset(test.gather_inputs(), test.gather_targets())};
}

bool is_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char b[4] = {};
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  const std::uint32_t magic = b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t{b[3]} << 24);
  return magic == kBinaryMagic;
}

// Test inputs, plus targets when the file has one more column than the model.
struct TestData {
  Eigen::MatrixXd inputs;
  std::optional<Eigen::VectorXd> targets;
};

TestData load_test(const std::string& source, const std::string& target, Index dim) {
  if (is_synthetic(source) || is_binary_file(source)) {
    const Dataset d = load_source(source, parse_target(target));
    return {d.inputs(), d.targets()};
  }
  const CsvTable table = load_table(source);
  if (table.values.cols() == dim) return {table.values, std::nullopt};
  if (table.values.cols() == dim + 1) {
    const Dataset d = split_target(table, parse_target(target));
    return {d.inputs(), d.targets()};
  }
  throw DataError("test data has " + std::to_string(table.values.cols()) +
                  " columns; model expects " + std::to_string(dim) + " features (+1 target)");
}

void add_experiment_options(CLI::App& cmd, ExperimentConfig& c) {
  cmd.add_option("--data", c.data, "Training data: CSV, binary cache, or synthetic:<name>:<n>[:<seed>[:<noise>]]")
      ->required();
  cmd.add_option("--target", c.target, "Target column name or index (negative counts from end)");
  cmd.add_option("--experts", c.num_experts, "Number of GP experts")->check(CLI::PositiveNumber);
  cmd.add_option("--graph", c.graph, "Computational graph: flat or branching factors a-b-c");
  cmd.add_option("--rule", c.rule, "Aggregation rule: poe, gpoe, bcm, rbcm");
  cmd.add_option("--seed", c.seed, "Seed for the expert assignment");
  cmd.add_option("--workers", c.training.workers, "Worker threads (default: all cores)");
  cmd.add_flag("!--no-normalize", c.normalize, "Do not z-score features and targets");
  cmd.add_option("--config", "JSON file with option values (command line wins)");
}

void add_training_options(CLI::App& cmd, ExperimentConfig& c) {
  cmd.add_option("--max-line-searches", c.training.max_line_searches, "L-BFGS line-search budget");
  cmd.add_option("--tolerance", c.training.gradient_tolerance, "Max-norm gradient tolerance");
  cmd.add_option("--lbfgs-memory", c.training.lbfgs_memory, "L-BFGS history length");
}

int cmd_train(const ExperimentConfig& c, const std::string& init_path, const std::string& trace_path,
              const std::string& metrics_path, std::ostream& out) {
  c.validate();
  const Rule rule = parse_rule(c.rule);
  const Dataset raw = load_source(c.data, parse_target(c.target));
  if (c.num_experts > static_cast<std::size_t>(raw.size())) {
    throw std::invalid_argument("more experts than training points");
  }
  std::optional<NormalizationStats> stats;
  Dataset data = raw;
  if (c.normalize) {
    auto [normalized, s] = normalize(raw);
    data = std::move(normalized);
    stats = std::move(s);
  }
  TrainingConfig training = c.training;
  training.seed = c.seed;
  if (!init_path.empty()) {
    std::ifstream in(init_path);
    if (!in) throw DataError("cannot open " + init_path);
    training.init = json::parse(in).get<Hyperparameters>();
    if (training.init->dim() != data.dim()) {
      throw DataError("initial hyperparameters have the wrong dimension");
    }
  }

  const Partition partition = random_partition(data, c.num_experts, c.seed);
  const auto start = std::chrono::steady_clock::now();
  const TrainingResult result = train(partition, training);
  const double train_seconds = seconds_since(start);

  ModelFile model;
  model.hp = result.hp;
  model.num_experts = c.num_experts;
  model.partition_seed = c.seed;
  model.graph = GraphSpec::parse(c.graph).to_string();
  model.rule = rule;
  model.data_source = absolute_source(c.data);
  model.target = c.target;
  model.normalization = stats;
  model.status = std::string(status_name(result.trace.status));
  model.line_searches = result.trace.entries.empty() ? 0 : result.trace.entries.back().iteration;
  model.final_lml = result.trace.entries.empty() ? objective_and_gradient(partition, result.hp).lml
                                                 : result.trace.entries.back().lml;
  if (!c.out.empty()) save_model(c.out, model);

  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw DataError("cannot write " + trace_path);
    result.trace.write_jsonl(trace);
  }
  if (!metrics_path.empty()) {
    const int workers = c.training.workers > 0 ? c.training.workers : default_workers();
    json m{{"train_seconds", train_seconds},
           {"gradient_eval_seconds", gradient_eval_seconds(partition, result.hp, workers, 3)},
           {"status", model.status},
           {"line_searches", model.line_searches},
           {"evaluations", result.trace.evaluations},
           {"final_lml", model.final_lml},
           {"config", echo(c)}};
    write_json(metrics_path, m);
  }
  out << "trained " << c.num_experts << " experts on " << raw.size() << " points: status "
      << model.status << ", " << model.line_searches << " line searches, LML " << model.final_lml
      << '\n';
  return kOk;
}

struct PredictOptions {
  std::string model;
  std::string test;
  std::string out;
  std::string metrics;
  std::string rule;
  std::string graph;
  bool latent = false;
  int workers = 0;
};

void write_predictions(const std::string& path, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& variance) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "mean,variance\n" << std::setprecision(17);
  for (Index i = 0; i < mean.size(); ++i) out << mean(i) << ',' << variance(i) << '\n';
}

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  ModelFile model = load_model(o.model);
  if (!o.rule.empty()) model.rule = parse_rule(o.rule);
  if (!o.graph.empty()) model.graph = o.graph;
  GraphSpec::parse(model.graph).validate(model.num_experts);
  const int workers = o.workers > 0 ? o.workers : default_workers();

  const Dataset train = load_source(model.data_source, parse_target(model.target));
  const TestData test = load_test(o.test, model.target, train.dim());
  if (!o.metrics.empty() && !test.targets) {
    throw DataError("metrics requested but the test data has no target column");
  }
  const auto start = std::chrono::steady_clock::now();
  const ModelPrediction pred = predict_with_model(model, train, test.inputs, workers);
  const double predict_seconds = seconds_since(start);

  if (!o.out.empty()) {
    write_predictions(o.out, pred.mean, o.latent ? pred.latent_variance : pred.observation_variance);
  }
  if (test.targets) {
    MetricsReport report;
    report.rmse = rmse(pred.mean, *test.targets);
    const NlpdResult nl = nlpd(pred.mean, pred.observation_variance, *test.targets);
    report.nlpd = nl.value;
    report.nlpd_floored = nl.floored;
    report.predict_seconds = predict_seconds;
    report.config = json{{"model", o.model},
                         {"test", o.test},
                         {"rule", std::string(rule_name(model.rule))},
                         {"graph", model.graph},
                         {"num_experts", model.num_experts}};
    if (!o.metrics.empty()) write_json(o.metrics, to_json(report));
    out << "rmse " << report.rmse << " nlpd " << report.nlpd << '\n';
  } else {
    out << "predicted " << pred.mean.size() << " points\n";
  }
  return kOk;
}

struct SodOptions {
  std::size_t subset_size = 0;
  std::string hp_path;
  int repeats = 3;
  std::string metrics;
};

int cmd_sod(const ExperimentConfig& c, const SodOptions& o, std::ostream& out) {
  c.validate();
  if (c.test.empty() && c.test_fraction <= 0.0) {
    throw std::invalid_argument("sod needs --test or --test-fraction");
  }
  const int workers = c.training.workers > 0 ? c.training.workers : default_workers();
  Dataset raw = load_source(c.data, parse_target(c.target));
  Dataset test_raw;
  if (c.test_fraction > 0.0) {
    auto [tr, te] = split_holdout(raw, c.test_fraction, c.seed);
    raw = std::move(tr);
    test_raw = std::move(te);
  } else {
    test_raw = load_source(c.test, parse_target(c.target));
  }
  Dataset train = raw;
  Dataset test = test_raw;
  std::optional<NormalizationStats> stats;
  if (c.normalize) {
    auto [normalized, s] = normalize(raw);
    train = std::move(normalized);
    test = s.apply(test_raw);
    stats = std::move(s);
  }

  std::optional<Hyperparameters> hp;
  if (!o.hp_path.empty()) {
    std::ifstream in(o.hp_path);
    if (!in) throw DataError("cannot open " + o.hp_path);
    hp = json::parse(in).get<Hyperparameters>();
  }
  const Hyperparameters timing_hp = hp ? *hp : heuristic_init(train);

  SodMatch match;
  if (o.subset_size > 0) {
    if (o.subset_size > static_cast<std::size_t>(train.size())) {
      throw std::invalid_argument("--subset-size exceeds the number of training points");
    }
    match.subset_size = o.subset_size;
  } else {
    const Partition partition = random_partition(train, c.num_experts, c.seed);
    match.target_seconds = gradient_eval_seconds(partition, timing_hp, workers, 5);
    match = match_sod_subset_size(train, timing_hp, match.target_seconds, c.seed, o.repeats);
  }

  const DataView subset = random_subset(train, match.subset_size, c.seed);
  const Dataset sod(subset.gather_inputs(), subset.gather_targets());
  const auto start = std::chrono::steady_clock::now();
  double train_seconds = 0.0;
  if (!hp) {
    TrainingConfig tc = c.training;
    tc.seed = c.seed;
    hp = dgp::train(Partition{{DataView(sod)}, c.seed}, tc).hp;
    train_seconds = seconds_since(start);
  }
  const double grad_seconds =
      median_seconds([&] { (void)lml_and_gradient(fit(DataView(sod), *hp)); }, 3);
  const auto predict_start = std::chrono::steady_clock::now();
  MomentsBatch pred = full_gp_predict(sod, *hp, test.inputs(), VarianceKind::kObservation);
  const double predict_seconds = seconds_since(predict_start);
  Eigen::VectorXd y = test_raw.targets();
  if (stats) {
    pred.mean = stats->denormalize_targets(pred.mean);
    pred.variance = stats->denormalize_variances(pred.variance);
  }

  MetricsReport report;
  report.rmse = rmse(pred.mean, y);
  const NlpdResult nl = nlpd(pred.mean, pred.variance, y);
  report.nlpd = nl.value;
  report.nlpd_floored = nl.floored;
  report.train_seconds = train_seconds;
  report.gradient_eval_seconds = grad_seconds;
  report.predict_seconds = predict_seconds;
  report.config = echo(c);
  report.config["sod_subset_size"] = match.subset_size;
  report.config["timing_target_seconds"] = match.target_seconds;
  report.config["timing_achieved_seconds"] = match.achieved_seconds;
  report.config["timing_match_infeasible"] = match.infeasible;
  const json j = to_json(report);
  if (!o.metrics.empty()) write_json(o.metrics, j);
  if (!c.out.empty()) write_json(c.out, j);
  out << "sod subset " << match.subset_size << (match.infeasible ? " (timing match infeasible)" : "")
      << ": rmse " << report.rmse << " nlpd " << report.nlpd << '\n';
  return kOk;
}

struct TimingOptions {
  std::string sizes = "8192,16384,32768,65536,131072";
  std::size_t points_per_expert = 512;
  Index dim = 8;
  int repeats = 5;
  int workers = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_timing(const TimingOptions& o, std::ostream& out) {
  std::vector<std::size_t> sizes;
  for (const auto& s : split(o.sizes, ',')) {
    try {
      sizes.push_back(std::stoul(s));
    } catch (const std::exception&) {
      throw std::invalid_argument("--sizes: bad entry '" + s + "'");
    }
  }
  if (sizes.empty()) throw std::invalid_argument("--sizes is empty");
  if (o.dim < 1) throw std::invalid_argument("--dim must be positive");
  const int workers = o.workers > 0 ? o.workers : default_workers();
  const auto rows = timing_sweep(sizes, o.points_per_expert, o.dim, o.repeats, workers, o.seed);

  std::ostringstream csv;
  csv << "n,experts,seconds,log2_n,log2_seconds,status\n" << std::setprecision(10);
  for (const auto& r : rows) {
    csv << r.n << ',' << r.experts << ',' << r.seconds << ',' << std::log2(static_cast<double>(r.n))
        << ',' << (r.seconds > 0.0 ? std::log2(r.seconds) : 0.0) << ',' << r.status << '\n';
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw DataError("cannot write " + o.out);
    f << csv.str();
  } else {
    out << csv.str();
  }
  if (rows.size() >= 2) out << "log-log slope " << loglog_slope(rows) << '\n';
  return kOk;
}

struct PathologyOptions {
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t experts = 5;
  std::size_t points_per_expert = 2;
  std::size_t grid_points = 801;
};

int cmd_pathology(const PathologyOptions& o, std::ostream& out) {
  PathologyConfig config;
  config.seed = o.seed;
  config.num_experts = o.experts;
  config.points_per_expert = o.points_per_expert;
  config.grid_points = o.grid_points;
  const PathologyResult result = run_pathology(config);

  fs::create_directories(o.out);
  save_csv(fs::path(o.out) / "data.csv", result.data, {"x", "y"});
  json summary{{"prior_variance", result.prior_variance}, {"num_experts", result.num_experts}};
  const auto& full_curve = result.curve("full");
  for (const auto& curve : result.curves) {
    std::ofstream f(fs::path(o.out) / (curve.model + ".csv"));
    if (!f) throw DataError("cannot write into " + o.out);
    f << "x,mean,variance,lower,upper,far_field\n" << std::setprecision(17);
    double far_var_min = std::numeric_limits<double>::infinity();
    double far_var_max = 0.0;
    for (Index g = 0; g < result.grid.size(); ++g) {
      const double sd = std::sqrt(curve.variance(g));
      const bool far = result.far_field[static_cast<std::size_t>(g)];
      f << result.grid(g) << ',' << curve.mean(g) << ',' << curve.variance(g) << ','
        << curve.mean(g) - 1.96 * sd << ',' << curve.mean(g) + 1.96 * sd << ',' << (far ? 1 : 0)
        << '\n';
      if (far) {
        far_var_min = std::min(far_var_min, curve.variance(g));
        far_var_max = std::max(far_var_max, curve.variance(g));
      }
    }
    summary[curve.model] = {{"far_field_variance_min", far_var_min},
                            {"far_field_variance_max", far_var_max},
                            {"max_abs_mean_deviation_from_full",
                             (curve.mean - full_curve.mean).cwiseAbs().maxCoeff()}};
  }
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_generate(const std::string& source, const std::string& path, bool binary, std::ostream& out) {
  const Dataset d = load_source(source, -1L);
  if (binary) {
    save_binary(path, d);
  } else {
    std::vector<std::string> header;
    for (Index j = 0; j < d.dim(); ++j) header.push_back("x" + std::to_string(j));
    header.push_back("y");
    save_csv(path, d, header);
  }
  out << "wrote " << d.size() << " rows to " << path << '\n';
  return kOk;
}

// Expands `--config file.json` into command-line options that are not given
// explicitly. Keys use the long option names (underscores are accepted for
// dashes); arrays become comma-separated values.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t consumed = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      consumed = 2;
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw DataError("config " + path + ": expected a JSON object");
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      const std::string flag = "--" + name;
      const bool present = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.starts_with(flag + "=");
      });
      if (present) continue;
      if (value.is_boolean()) {
        if (value.get<bool>()) extra.push_back(flag);
        continue;
      }
      extra.push_back(flag);
      if (value.is_string()) {
        extra.push_back(value.get<std::string>());
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) {
          if (!joined.empty()) joined += ',';
          joined += v.is_string() ? v.get<std::string>() : v.dump();
        }
        extra.push_back(joined);
      } else {
        extra.push_back(value.dump());
      }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed Gaussian-process regression with product-of-experts aggregation", "dgp"};
  app.require_subcommand(1);

  ExperimentConfig exp;
  std::string init_path;
  std::string trace_path;
  std::string train_metrics;
  auto* train_cmd = app.add_subcommand("train", "Train shared hyperparameters and write a model file");
  add_experiment_options(*train_cmd, exp);
  add_training_options(*train_cmd, exp);
  train_cmd->add_option("--out", exp.out, "Model JSON output")->required();
  train_cmd->add_option("--init", init_path, "Initial hyperparameters JSON (normalized units)");
  train_cmd->add_option("--trace", trace_path, "Training trace output (JSON lines)");
  train_cmd->add_option("--metrics", train_metrics, "Timing report JSON output");

  PredictOptions pred;
  auto* predict_cmd = app.add_subcommand("predict", "Predict with a trained model");
  predict_cmd->add_option("--model", pred.model, "Model JSON from train")->required();
  predict_cmd->add_option("--test", pred.test, "Test data (features, optionally + target)")->required();
  predict_cmd->add_option("--out", pred.out, "Prediction CSV (mean,variance)");
  predict_cmd->add_option("--metrics", pred.metrics, "Metrics JSON (needs test targets)");
  predict_cmd->add_option("--rule", pred.rule, "Override the model's aggregation rule");
  predict_cmd->add_option("--graph", pred.graph, "Override the model's computational graph");
  predict_cmd->add_flag("--latent", pred.latent, "Write latent instead of observation variances");
  predict_cmd->add_option("--workers", pred.workers, "Worker threads (default: all cores)");
  predict_cmd->add_option("--config", "JSON file with option values");

  ExperimentConfig sod_exp;
  SodOptions sod;
  auto* sod_cmd = app.add_subcommand("sod", "Subset-of-data baseline at a matched gradient-time budget");
  add_experiment_options(*sod_cmd, sod_exp);
  add_training_options(*sod_cmd, sod_exp);
  sod_cmd->add_option("--test", sod_exp.test, "Test data");
  sod_cmd->add_option("--test-fraction", sod_exp.test_fraction, "Hold out this fraction as test data");
  sod_cmd->add_option("--subset-size", sod.subset_size, "Subset size (0: match DGP gradient time)");
  sod_cmd->add_option("--hp", sod.hp_path, "Hyperparameters JSON (default: train on the subset)");
  sod_cmd->add_option("--repeats", sod.repeats, "Timing repetitions per probe");
  sod_cmd->add_option("--out", sod_exp.out, "Metrics JSON output");

  PathologyOptions path;
  auto* path_cmd = app.add_subcommand("pathology", "1-D toy study of the aggregation rules (plot data)");
  path_cmd->add_option("--out", path.out, "Output directory");
  path_cmd->add_option("--seed", path.seed, "Data and assignment seed");
  path_cmd->add_option("--experts", path.experts, "Number of experts")->check(CLI::PositiveNumber);
  path_cmd->add_option("--points-per-expert", path.points_per_expert, "Points per expert")
      ->check(CLI::PositiveNumber);
  path_cmd->add_option("--grid-points", path.grid_points, "Grid resolution");
  path_cmd->add_option("--config", "JSON file with option values");

  TimingOptions timing;
  auto* timing_cmd = app.add_subcommand("timing", "Gradient-evaluation time versus training-set size");
  timing_cmd->add_option("--sizes", timing.sizes, "Comma-separated training-set sizes");
  timing_cmd->add_option("--points-per-expert", timing.points_per_expert, "Points per expert");
  timing_cmd->add_option("--dim", timing.dim, "Input dimension");
  timing_cmd->add_option("--repeats", timing.repeats, "Repetitions per size (median)");
  timing_cmd->add_option("--workers", timing.workers, "Worker threads (default: all cores)");
  timing_cmd->add_option("--seed", timing.seed, "Data seed");
  timing_cmd->add_option("--out", timing.out, "CSV output (default: stdout)");
  timing_cmd->add_option("--config", "JSON file with option values");

  std::string gen_source;
  std::string gen_out;
  bool gen_binary = false;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset to disk");
  gen_cmd->add_option("--data", gen_source, "synthetic:<name>:<n>[:<seed>[:<noise>]]")->required();
  gen_cmd->add_option("--out", gen_out, "Output path")->required();
  gen_cmd->add_flag("--binary", gen_binary, "Write the binary cache format instead of CSV");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (train_cmd->parsed()) return cmd_train(exp, init_path, trace_path, train_metrics, out);
    if (predict_cmd->parsed()) return cmd_predict(pred, out);
    if (sod_cmd->parsed()) return cmd_sod(sod_exp, sod, out);
    if (path_cmd->parsed()) return cmd_pathology(path, out);
    if (timing_cmd->parsed()) return cmd_timing(timing, out);
    if (gen_cmd->parsed()) return cmd_generate(gen_source, gen_out, gen_binary, out);
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace dgp::cli
