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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dgp/cli.hpp"
#include "dgp/metrics.hpp"

namespace dgp::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dgp_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small 8-D train/test pair on disk.
  void make_data() {
    ASSERT_EQ(call({"generate", "--data", "synthetic:arm:400:1", "--out", path("train.csv")}), kOk);
    ASSERT_EQ(call({"generate", "--data", "synthetic:arm:100:2", "--out", path("test.csv")}), kOk);
  }

  int train_default(const std::string& model) {
    return call({"train", "--data", path("train.csv"), "--experts", "4", "--graph", "2-2", "--rule",
                 "rbcm", "--seed", "3", "--out", model, "--max-line-searches", "30"});
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, TrainThenPredictRoundTrip) {
  make_data();
  ASSERT_EQ(train_default(path("model.json")), kOk) << err_.str();
  ASSERT_EQ(call({"predict", "--model", path("model.json"), "--test", path("test.csv"), "--out",
                  path("p1.csv"), "--metrics", path("m.json")}),
            kOk)
      << err_.str();
  ASSERT_EQ(call({"predict", "--model", path("model.json"), "--test", path("test.csv"), "--out",
                  path("p2.csv")}),
            kOk);
  EXPECT_EQ(slurp(path("p1.csv")), slurp(path("p2.csv")));

  // The library path gives the same numbers as the CSV.
  const ModelFile model = load_model(path("model.json"));
  const Dataset train = load_dataset(path("train.csv"));
  const Dataset test = load_dataset(path("test.csv"));
  const ModelPrediction pred = predict_with_model(model, train, test.inputs(), 1);
  std::ifstream csv(path("p1.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "mean,variance");
  for (Index i = 0; i < test.size(); ++i) {
    ASSERT_TRUE(std::getline(csv, line));
    const auto comma = line.find(',');
    EXPECT_EQ(std::stod(line.substr(0, comma)), pred.mean(i));
    EXPECT_EQ(std::stod(line.substr(comma + 1)), pred.observation_variance(i));
  }

  const json m = json::parse(slurp(path("m.json")));
  EXPECT_NEAR(m.at("rmse").get<double>(), rmse(pred.mean, test.targets()), 1e-12);
  const double obs_nlpd = nlpd(pred.mean, pred.observation_variance, test.targets()).value;
  const double lat_nlpd = nlpd(pred.mean, pred.latent_variance, test.targets()).value;
  EXPECT_NEAR(m.at("nlpd").get<double>(), obs_nlpd, 1e-12);
  EXPECT_NE(obs_nlpd, lat_nlpd);
}

TEST_F(Cli, SameSeedGivesIdenticalModelFiles) {
  make_data();
  ASSERT_EQ(train_default(path("a.json")), kOk);
  ASSERT_EQ(train_default(path("b.json")), kOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const json j = json::parse(slurp(path("a.json")));
  EXPECT_EQ(j.at("rule"), "rbcm");
  EXPECT_EQ(j.at("graph"), "2-2");
  EXPECT_EQ(j.at("num_experts"), 4);
  EXPECT_EQ(j.at("partition_seed"), 3);
  EXPECT_TRUE(j.at("hyperparameters").contains("log_lengthscales"));
  EXPECT_FALSE(j.at("normalization").is_null());
}

TEST_F(Cli, ModelJsonRoundTrip) {
  make_data();
  ASSERT_EQ(train_default(path("model.json")), kOk);
  const ModelFile m = load_model(path("model.json"));
  save_model(path("again.json"), m);
  EXPECT_EQ(slurp(path("model.json")), slurp(path("again.json")));
}

TEST_F(Cli, LatentFlagWritesLatentVariance) {
  make_data();
  ASSERT_EQ(train_default(path("model.json")), kOk);
  ASSERT_EQ(call({"predict", "--model", path("model.json"), "--test", path("test.csv"), "--out",
                  path("lat.csv"), "--latent"}),
            kOk);
  const ModelFile model = load_model(path("model.json"));
  const ModelPrediction pred = predict_with_model(model, load_dataset(path("train.csv")),
                                                  load_dataset(path("test.csv")).inputs(), 1);
  std::ifstream csv(path("lat.csv"));
  std::string line;
  std::getline(csv, line);
  std::getline(csv, line);
  EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), pred.latent_variance(0));
}

TEST_F(Cli, UsageErrors) {
  make_data();
  EXPECT_EQ(call({"train", "--data", path("train.csv"), "--rule", "moe", "--out", path("m.json")}),
            kUsage);
  EXPECT_NE(err_.str().find("moe"), std::string::npos);
  EXPECT_EQ(call({"train", "--data", path("train.csv"), "--experts", "5", "--graph", "2-2", "--out",
                  path("m.json")}),
            kUsage);
  EXPECT_EQ(call({"train", "--data", path("train.csv"), "--bogus", "--out", path("m.json")}),
            kUsage);
  EXPECT_EQ(call({}), kUsage);
  EXPECT_EQ(call({"frobnicate"}), kUsage);
  EXPECT_EQ(call({"train", "--data", "synthetic:nope:10", "--out", path("m.json")}), kUsage);
  EXPECT_EQ(call({"train", "--data", path("train.csv"), "--experts", "1000", "--out",
                  path("m.json")}),
            kUsage);
  EXPECT_EQ(call({"--help"}), kOk);
  EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(Cli, DataErrors) {
  make_data();
  EXPECT_EQ(call({"train", "--data", path("missing.csv"), "--out", path("m.json")}), kDataFailure);
  std::ofstream(path("bad.csv")) << "a,b\n1,2\n3,x\n";
  EXPECT_EQ(call({"train", "--data", path("bad.csv"), "--out", path("m.json")}), kDataFailure);
  EXPECT_NE(err_.str().find("row 3"), std::string::npos);

  ASSERT_EQ(train_default(path("model.json")), kOk);
  // Features only: fine for predictions, but metrics need targets.
  std::ofstream(path("features.csv")) << "1,2,3,4,5,6,7,8\n0,0,0,0,0,0,0,0\n";
  EXPECT_EQ(call({"predict", "--model", path("model.json"), "--test", path("features.csv"), "--out",
                  path("p.csv")}),
            kOk);
  EXPECT_EQ(call({"predict", "--model", path("model.json"), "--test", path("features.csv"),
                  "--metrics", path("m.json")}),
            kDataFailure);
  std::ofstream(path("narrow.csv")) << "1,2,3\n";
  EXPECT_EQ(call({"predict", "--model", path("model.json"), "--test", path("narrow.csv")}),
            kDataFailure);
  std::ofstream(path("broken.json")) << "{ not json";
  EXPECT_EQ(call({"predict", "--model", path("broken.json"), "--test", path("test.csv")}),
            kDataFailure);
}

TEST_F(Cli, NumericalFailureExitCode) {
  make_data();
  ASSERT_EQ(train_default(path("model.json")), kOk);
  json j = json::parse(slurp(path("model.json")));
  j["hyperparameters"]["log_signal_variance"] = 1e308;
  std::ofstream(path("overflow.json")) << j.dump();
  EXPECT_EQ(call({"predict", "--model", path("overflow.json"), "--test", path("test.csv")}),
            kNumericalFailure);
}

TEST_F(Cli, JsonConfigFillsMissingOptions) {
  make_data();
  std::ofstream(path("cfg.json")) << json{{"experts", 4},
                                          {"graph", "4"},
                                          {"rule", "bcm"},
                                          {"seed", 3},
                                          {"max_line_searches", 0}}
                                         .dump();
  ASSERT_EQ(call({"train", "--config", path("cfg.json"), "--data", path("train.csv"), "--rule",
                  "gpoe", "--out", path("m.json")}),
            kOk)
      << err_.str();
  const json m = json::parse(slurp(path("m.json")));
  EXPECT_EQ(m.at("rule"), "gpoe");
  EXPECT_EQ(m.at("graph"), "4");
  EXPECT_EQ(m.at("num_experts"), 4);
  EXPECT_EQ(m.at("training").at("status"), "budget");
  std::ofstream(path("bad.json")) << "[1, 2]";
  EXPECT_EQ(call({"train", "--config", path("bad.json"), "--data", path("train.csv"), "--out",
                  path("m.json")}),
            kDataFailure);
}

TEST_F(Cli, TraceAndTrainingMetrics) {
  make_data();
  ASSERT_EQ(call({"train", "--data", path("train.csv"), "--experts", "4", "--out", path("m.json"),
                  "--trace", path("t.jsonl"), "--metrics", path("tm.json"), "--max-line-searches",
                  "5"}),
            kOk);
  std::ifstream trace(path("t.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(trace, line)) {
    EXPECT_TRUE(json::parse(line).contains("lml"));
    ++lines;
  }
  EXPECT_GE(lines, 2);
  const json tm = json::parse(slurp(path("tm.json")));
  EXPECT_GT(tm.at("gradient_eval_seconds").get<double>(), 0.0);
  EXPECT_EQ(tm.at("config").at("num_experts"), 4);
}

TEST_F(Cli, BinaryCacheIsAcceptedEverywhere) {
  ASSERT_EQ(call({"generate", "--data", "synthetic:gp1d:200:4", "--out", path("d.bin"), "--binary"}),
            kOk);
  ASSERT_EQ(call({"train", "--data", path("d.bin"), "--experts", "2", "--out", path("m.json"),
                  "--max-line-searches", "3"}),
            kOk)
      << err_.str();
  EXPECT_EQ(call({"predict", "--model", path("m.json"), "--test", path("d.bin"), "--metrics",
                  path("x.json")}),
            kOk)
      << err_.str();
}

TEST_F(Cli, SodWithFixedSubset) {
  make_data();
  ASSERT_EQ(call({"sod", "--data", path("train.csv"), "--test", path("test.csv"), "--subset-size",
                  "100", "--max-line-searches", "10", "--out", path("sod.json")}),
            kOk)
      << err_.str();
  const json j = json::parse(slurp(path("sod.json")));
  EXPECT_EQ(j.at("config").at("sod_subset_size"), 100);
  EXPECT_GT(j.at("rmse").get<double>(), 0.0);
  EXPECT_EQ(call({"sod", "--data", path("train.csv"), "--subset-size", "10"}), kUsage);
  EXPECT_EQ(call({"sod", "--data", path("train.csv"), "--test-fraction", "0.2", "--subset-size",
                  "10000"}),
            kUsage);
}

TEST_F(Cli, TimingTable) {
  ASSERT_EQ(call({"timing", "--sizes", "256,512", "--points-per-expert", "128", "--dim", "2",
                  "--repeats", "1", "--out", path("t.csv")}),
            kOk);
  std::ifstream in(path("t.csv"));
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(header, "n,experts,seconds,log2_n,log2_seconds,status");
  EXPECT_EQ(first.substr(0, 6), "256,2,");
  EXPECT_EQ(second.substr(0, 6), "512,4,");
  EXPECT_EQ(call({"timing", "--sizes", "12,abc"}), kUsage);
}

TEST_F(Cli, PathologyOutputsAreDeterministic) {
  ASSERT_EQ(call({"pathology", "--out", path("a"), "--grid-points", "101"}), kOk);
  ASSERT_EQ(call({"pathology", "--out", path("b"), "--grid-points", "101"}), kOk);
  for (const char* name : {"data.csv", "full.csv", "poe.csv", "gpoe.csv", "bcm.csv", "rbcm.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / name)) << name;
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
  }
  std::ifstream in(dir_ / "a" / "rbcm.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x,mean,variance,lower,upper,far_field");
}

TEST(CliSources, ParseTargetAndSynthetic) {
  EXPECT_EQ(std::get<long>(parse_target("-1")), -1);
  EXPECT_EQ(std::get<long>(parse_target("3")), 3);
  EXPECT_EQ(std::get<std::string>(parse_target("y")), "y");
  const Dataset a = load_source("synthetic:sine:50:7", -1L);
  EXPECT_EQ(a.size(), 50);
  EXPECT_EQ(a.dim(), 1);
  EXPECT_THROW(load_source("synthetic:arm", -1L), std::invalid_argument);
  EXPECT_THROW(load_source("synthetic:arm:x", -1L), std::invalid_argument);
}

}  // namespace
}  // namespace dgp::cli
