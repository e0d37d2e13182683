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

// Acceptance suite. Prints one verdict line per criterion, followed by
// indented detail lines, and exits nonzero if any criterion fails.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dgp/comp_graph.hpp"
#include "dgp/experiments.hpp"
#include "dgp/metrics.hpp"
#include "dgp/random.hpp"
#include "dgp/synthetic.hpp"
#include "dgp/trainer.hpp"

namespace {

using namespace dgp;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double max_rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a(i)), std::abs(b(i)), floor});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

Eigen::MatrixXd uniform_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

std::vector<ExpertState> fit_all(const Partition& p, const Hyperparameters& hp) {
  std::vector<ExpertState> out;
  out.reserve(p.views.size());
  for (const auto& v : p.views) out.push_back(fit(v, hp));
  return out;
}

struct Verdict {
  bool pass = false;
  bool soft = false;
  std::string summary;
  std::vector<std::string> details;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ---------------------------------------------------------------------------
Verdict single_expert_exactness() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const Index n = 500;
  const Index d = 3;
  Eigen::MatrixXd x = uniform_matrix(rng, n, d, -3.0, 3.0);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = std::sin(x(i, 0)) * std::cos(x(i, 1)) + 0.2 * x(i, 2) + 0.1 * rng.normal();
  const Dataset data(x, y);
  const Hyperparameters hp = Hyperparameters::from_natural(1.0, 1.2, 0.1, d);
  const Eigen::MatrixXd xs = uniform_matrix(rng, 500, d, -3.5, 3.5);
  const MomentsBatch full = full_gp_predict(data, hp, xs);

  Verdict v;
  double worst = 0.0;
  for (const Rule rule : {Rule::kPoE, Rule::kGPoE, Rule::kBCM}) {
    const ComputationGraph g =
        build_graph(GraphSpec::flat(), fit_all(random_partition(data, 1, 0), hp), rule);
    const GraphPrediction p = predict_graph(g, xs);
    const double em = max_rel(p.mean, full.mean, 1e-300);
    const double ev = max_rel(p.variance, full.variance, 1e-300);
    worst = std::max({worst, em, ev});
    v.details.push_back(fmt("%s: max rel err mean %.3g, variance %.3g", std::string(rule_name(rule)).c_str(), em, ev));
  }
  const double secs = seconds_since(t0);
  v.pass = worst <= 1e-8 && secs < 10.0;
  v.summary = fmt("single-expert exactness: max rel err %.3g (tol 1e-8), %.2f s (limit 10 s)", worst, secs);
  return v;
}

// 2 ---------------------------------------------------------------------------
Verdict graph_shape_invariance() {
  const auto t0 = Clock::now();
  Rng rng(202);
  const Index n = 16 * 50;
  Eigen::MatrixXd x = uniform_matrix(rng, n, 1, -10.0, 10.0);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = std::sin(x(i, 0)) + 0.1 * rng.normal();
  const Dataset data(x, y);
  const Hyperparameters hp = Hyperparameters::from_natural(1.0, 0.8, 0.1, 1);
  const Partition part = random_partition(data, 16, 7);
  const Eigen::MatrixXd xs = uniform_matrix(rng, 1000, 1, -15.0, 15.0);

  const std::vector<std::string> specs = {"flat", "4-4", "2-2-2-2", "2-8"};
  std::vector<GraphPrediction> preds;
  for (const auto& s : specs) {
    preds.push_back(predict_graph(build_graph(GraphSpec::parse(s), fit_all(part, hp), Rule::kRBCM), xs));
  }
  Verdict v;
  double worst = 0.0;
  for (std::size_t a = 0; a < specs.size(); ++a) {
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      const double e = std::max(max_rel(preds[a].mean, preds[b].mean, 1e-300),
                                max_rel(preds[a].variance, preds[b].variance, 1e-300));
      worst = std::max(worst, e);
      v.details.push_back(fmt("%s vs %s: %.3g", specs[a].c_str(), specs[b].c_str(), e));
    }
  }
  const double secs = seconds_since(t0);
  v.pass = worst <= 1e-10 && secs < 30.0;
  v.summary = fmt("graph-shape invariance (rBCM, M=16): max pairwise rel err %.3g (tol 1e-10), %.2f s (limit 30 s)", worst, secs);
  return v;
}

// 3 ---------------------------------------------------------------------------
Verdict gradient_correctness() {
  const auto t0 = Clock::now();
  Rng rng(303);
  Verdict v;
  double worst = 0.0;
  const Index dims[] = {1, 3, 8};
  for (int inst = 0; inst < 20; ++inst) {
    const Index d = dims[inst % 3];
    Eigen::MatrixXd x = uniform_matrix(rng, 200, d, -2.0, 2.0);
    Eigen::VectorXd y(200);
    for (Index i = 0; i < 200; ++i) y(i) = std::sin(x.row(i).sum()) + 0.1 * rng.normal();
    const Dataset data(x, y);
    const Partition part = random_partition(data, 4, static_cast<std::uint64_t>(inst));
    Hyperparameters hp;
    hp.log_signal_variance = rng.uniform(-1.0, 1.0);
    hp.log_lengthscales = Eigen::VectorXd(d);
    for (Index j = 0; j < d; ++j) hp.log_lengthscales(j) = rng.uniform(-0.5, 1.0) + 0.5 * std::log(static_cast<double>(d));
    hp.log_noise_std = rng.uniform(-2.5, -0.5);
    const Eigen::VectorXd theta = hp.to_vector();
    const Eigen::VectorXd g = objective_and_gradient(part, hp).gradient;
    double inst_worst = 0.0;
    for (Index j = 0; j < theta.size(); ++j) {
      Eigen::VectorXd hi = theta;
      Eigen::VectorXd lo = theta;
      hi(j) += 1e-5;
      lo(j) -= 1e-5;
      const double fd = (objective_and_gradient(part, Hyperparameters::from_vector(hi)).lml -
                         objective_and_gradient(part, Hyperparameters::from_vector(lo)).lml) / 2e-5;
      // Relative to max(|analytic|, |fd|, 1): coordinates with |gradient| < 1
      // are held to an absolute 1e-5.
      const double e = std::abs(g(j) - fd) / std::max({std::abs(g(j)), std::abs(fd), 1.0});
      inst_worst = std::max(inst_worst, e);
    }
    worst = std::max(worst, inst_worst);
    v.details.push_back(fmt("instance %2d (D=%d): max rel err %.3g", inst, static_cast<int>(d), inst_worst));
  }
  const double secs = seconds_since(t0);
  v.pass = worst <= 1e-5 && secs < 120.0;
  v.summary = fmt("gradient correctness (20 instances, N=200, M=4): max rel err %.3g (tol 1e-5), %.2f s (limit 120 s)", worst, secs);
  return v;
}

// 4 ---------------------------------------------------------------------------
struct PathologyCheck {
  double poe_far_max = 0.0;
  double gpoe_far_dev = 0.0;
  double rbcm_far_dev = 0.0;
  double bcm_far_dev = 0.0;
  double bcm_mean_dev = 0.0;
  double rbcm_mean_dev = 0.0;
  std::size_t far_points = 0;
};

PathologyCheck check_pathology(const PathologyResult& r) {
  PathologyCheck c;
  const double prior = r.prior_variance;
  const auto& full = r.curve("full");
  c.bcm_mean_dev = (r.curve("bcm").mean - full.mean).cwiseAbs().maxCoeff();
  c.rbcm_mean_dev = (r.curve("rbcm").mean - full.mean).cwiseAbs().maxCoeff();
  for (Index g = 0; g < r.grid.size(); ++g) {
    if (!r.far_field[static_cast<std::size_t>(g)]) continue;
    ++c.far_points;
    c.poe_far_max = std::max(c.poe_far_max, r.curve("poe").variance(g));
    c.gpoe_far_dev = std::max(c.gpoe_far_dev, std::abs(r.curve("gpoe").variance(g) - prior) / prior);
    c.rbcm_far_dev = std::max(c.rbcm_far_dev, std::abs(r.curve("rbcm").variance(g) - prior) / prior);
    c.bcm_far_dev = std::max(c.bcm_far_dev, std::abs(r.curve("bcm").variance(g) - prior) / prior);
  }
  return c;
}

Verdict pathology() {
  const PathologyConfig cfg;
  const PathologyResult r = run_pathology(cfg);
  const PathologyCheck c = check_pathology(r);
  const double prior = r.prior_variance;
  const double m = static_cast<double>(r.num_experts);
  const bool limits = c.far_points > 0 && c.poe_far_max < prior / m * 1.1 && c.gpoe_far_dev < 0.01 &&
                      c.rbcm_far_dev < 0.01 && c.bcm_far_dev < 0.01;
  const bool kink = c.bcm_mean_dev > c.rbcm_mean_dev;

  Verdict v;
  v.pass = limits && kink;
  v.summary = fmt("pathology toy (5 experts x 2 points, seed %d): far-field limits %s, BCM mean deviation %.4f %s rBCM %.4f",
                  static_cast<int>(cfg.seed), limits ? "hold" : "violated", c.bcm_mean_dev,
                  kink ? ">" : "<=", c.rbcm_mean_dev);
  v.details.push_back(fmt("far-field points %zu; PoE max variance %.4f (limit %.4f)", c.far_points, c.poe_far_max, prior / m * 1.1));
  v.details.push_back(fmt("far-field max rel deviation from prior: gPoE %.2e, rBCM %.2e, BCM %.2e (limit 1e-2)", c.gpoe_far_dev, c.rbcm_far_dev, c.bcm_far_dev));
  // The mean ordering depends on the particular GP draw; show how often it
  // holds over further draws of the same toy.
  int holds = 0;
  const int draws = 40;
  for (int s = 1; s <= draws; ++s) {
    PathologyConfig other = cfg;
    other.seed = static_cast<std::uint64_t>(s);
    const PathologyCheck o = check_pathology(run_pathology(other));
    holds += o.bcm_mean_dev > o.rbcm_mean_dev ? 1 : 0;
  }
  v.details.push_back(fmt("BCM deviation > rBCM deviation in %d of %d toy draws (seeds 1..%d)", holds, draws, draws));
  return v;
}

// 5 ---------------------------------------------------------------------------
Verdict linear_scaling() {
  const int workers = default_workers();
  const std::vector<std::size_t> sizes = {1u << 13, 1u << 14, 1u << 15, 1u << 16, 1u << 17};
  const auto rows = timing_sweep(sizes, 512, 8, 5, workers, 0);
  const double slope = loglog_slope(rows);
  Verdict v;
  v.pass = std::abs(slope - 1.0) <= 0.15;
  v.summary = fmt("linear-cost scaling (n_k=512, N=2^13..2^17, %d worker(s)): log-log slope %.3f (target 1.0 +- 0.15)", workers, slope);
  for (const auto& r : rows) {
    v.details.push_back(fmt("N=%7zu M=%4zu median gradient time %.4f s (%s)", r.n, r.experts, r.seconds, r.status.c_str()));
  }
  return v;
}

Verdict million_points_soft() {
  const int workers = default_workers();
  const auto rows = timing_sweep({1000000}, 512, 8, 1, workers, 0);
  Verdict v;
  v.soft = true;
  const double secs = rows.front().seconds;
  v.pass = rows.front().status == "ok" && secs <= 120.0 && workers >= 4;
  v.summary = fmt("N=10^6 objective+gradient (n_k=512): %.1f s on %d worker(s) (soft target <= 120 s on >= 4 cores)", secs, workers);
  if (workers < 4) v.details.push_back("precondition not met: fewer than 4 cores available");
  v.details.push_back(fmt("implied 30-100 line-search training cycle: %.0f-%.0f min", 30.0 * secs / 60.0, 100.0 * secs / 60.0));
  return v;
}

// 6 ---------------------------------------------------------------------------
struct RuleScores {
  double rmse[4];
  double nlpd[4];
};

RuleScores score_rules(const Partition& part, const Hyperparameters& hp, const Dataset& test,
                       const NormalizationStats& stats, const Eigen::VectorXd& y_raw, int workers) {
  RuleScores s{};
  int i = 0;
  for (const Rule rule : {Rule::kPoE, Rule::kGPoE, Rule::kBCM, Rule::kRBCM}) {
    const ComputationGraph g = build_graph(GraphSpec::flat(), fit_all(part, hp), rule);
    const GraphPrediction p = execute_parallel(g, test.inputs(), workers);
    const Eigen::VectorXd mean = stats.denormalize_targets(p.mean);
    const Eigen::VectorXd var =
        stats.denormalize_variances((p.variance.array() + hp.noise_variance()).matrix());
    s.rmse[i] = rmse(mean, y_raw);
    s.nlpd[i] = nlpd(mean, var, y_raw).value;
    ++i;
  }
  return s;
}

Verdict kin40k_ordering() {
  const auto t0 = Clock::now();
  const int workers = default_workers();
  // Full-GP hyperparameters: exact GP trained on a 2000-point draw of the
  // same generator (a 10k-point full GP is out of reach on a desk machine).
  const auto [hp_data, hp_stats] = normalize(synthetic::robot_arm(2000, 9999));
  TrainingConfig tc;
  tc.workers = workers;
  const TrainingResult full = train(hp_data, 1, tc);
  const Hyperparameters hp = full.hp;

  Verdict v;
  v.details.push_back(fmt("full-GP hyperparameters from 2000 points: status %s, s^2 %.3f, noise %.4f, %.1f s",
                          std::string(status_name(full.trace.status)).c_str(), hp.signal_variance(),
                          hp.noise_std(), seconds_since(t0)));
  const char* names[] = {"PoE", "gPoE", "BCM", "rBCM"};
  const std::size_t sizes[] = {39, 156, 625};
  int seeds_ok = 0;
  int rmse_ok[2] = {0, 0};
  int sod_ok[2] = {0, 0};
  int nlpd_ok = 0;
  const int repetitions = 10;
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto seed = static_cast<std::uint64_t>(rep);
    const Dataset train_raw = synthetic::robot_arm(10000, 2 * seed + 1);
    const Dataset test_raw = synthetic::robot_arm(5000, 2 * seed + 2);
    const auto [train_n, stats] = normalize(train_raw);
    const Dataset test_n = stats.apply(test_raw);
    bool all = true;
    for (int si = 0; si < 3; ++si) {
      const std::size_t ppe = sizes[si];
      const std::size_t m = 10000 / ppe;
      const Partition part = random_partition(train_n, m, seed);
      const RuleScores s = score_rules(part, hp, test_n, stats, test_raw.targets(), workers);
      std::string line = fmt("seed %d n_k=%zu M=%zu rmse", rep, ppe, m);
      for (int r = 0; r < 4; ++r) line += fmt(" %s %.4f", names[r], s.rmse[r]);
      line += " | nlpd";
      for (int r = 0; r < 4; ++r) line += fmt(" %s %.3f", names[r], s.nlpd[r]);
      if (ppe == 39) {
        const bool ok = s.nlpd[3] <= s.nlpd[2] && s.nlpd[3] <= s.nlpd[0];
        nlpd_ok += ok;
        all &= ok;
      } else {
        const int k = ppe == 156 ? 0 : 1;
        const bool dgp_ok = s.rmse[3] <= s.rmse[0] && s.rmse[3] <= s.rmse[1] && s.rmse[3] <= s.rmse[2];
        const double target = gradient_eval_seconds(part, hp, workers, 5);
        const SodMatch match = match_sod_subset_size(train_n, hp, target, seed, 3);
        const DataView sub = random_subset(train_n, match.subset_size, seed);
        const MomentsBatch sp = full_gp_predict(Dataset(sub.gather_inputs(), sub.gather_targets()), hp,
                                                test_n.inputs());
        const double sod_rmse = rmse(stats.denormalize_targets(sp.mean), test_raw.targets());
        const bool beats_sod = s.rmse[3] <= sod_rmse;
        line += fmt(" | SOD n=%zu (%.3f s vs %.3f s) rmse %.4f", match.subset_size, match.achieved_seconds, target, sod_rmse);
        rmse_ok[k] += dgp_ok;
        sod_ok[k] += beats_sod;
        all &= dgp_ok && beats_sod;
      }
      v.details.push_back(line);
    }
    seeds_ok += all;
  }
  v.details.push_back(fmt("rBCM RMSE <= PoE/gPoE/BCM: n_k=156 %d/10, n_k=625 %d/10", rmse_ok[0], rmse_ok[1]));
  v.details.push_back(fmt("rBCM RMSE <= SOD at matched gradient time: n_k=156 %d/10, n_k=625 %d/10", sod_ok[0], sod_ok[1]));
  v.details.push_back(fmt("rBCM NLPD <= BCM and PoE at n_k=39: %d/10", nlpd_ok));
  v.pass = seeds_ok >= 8;
  v.summary = fmt("8-D ordering study (10k train / 5k test, %d worker(s)): all orderings hold in %d/10 repetitions (need >= 8), %.0f s",
                  workers, seeds_ok, seconds_since(t0));
  return v;
}

// 7 ---------------------------------------------------------------------------
Verdict invariant_suite() {
  const auto t0 = Clock::now();
  Rng rng(707);
  std::vector<std::string> failures;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok && std::find(failures.begin(), failures.end(), what) == failures.end()) failures.push_back(what);
  };
  const int cases = 100;
  int counts[6] = {0, 0, 0, 0, 0, 0};

  // Partition disjoint cover.
  for (int c = 0; c < cases; ++c, ++counts[0]) {
    const Index n = 1 + static_cast<Index>(rng.uniform_index(500));
    const auto m = 1 + static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const Dataset d(uniform_matrix(rng, n, 1, 0.0, 1.0), Eigen::VectorXd::Zero(n));
    const Partition p = random_partition(d, m, rng.next_u64());
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    Index smallest = n;
    Index largest = 0;
    for (const auto& v : p.views) {
      smallest = std::min(smallest, v.size());
      largest = std::max(largest, v.size());
      for (const Index i : v.indices()) ++hits[static_cast<std::size_t>(i)];
    }
    check(p.num_experts() == m && largest - smallest <= 1 &&
              std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }),
          "partition disjoint cover");
  }

  // Kernel PSD and gradient checks.
  for (int c = 0; c < cases; ++c, ++counts[1]) {
    const Index d = 1 + static_cast<Index>(rng.uniform_index(5));
    Hyperparameters hp;
    hp.log_signal_variance = rng.uniform(-1.0, 1.0);
    hp.log_lengthscales = uniform_matrix(rng, d, 1, -0.5, 1.0).col(0);
    hp.log_noise_std = rng.uniform(-3.0, -1.0);
    const Eigen::MatrixXd x = uniform_matrix(rng, 12, d, -2.0, 2.0);
    Eigen::MatrixXd ky = kernel_matrix(x, x, hp);
    ky.diagonal().array() += hp.noise_variance();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ky).eigenvalues()(0);
    check(min_eig > 0.0 && (ky - ky.transpose()).cwiseAbs().maxCoeff() == 0.0, "kernel PSD");
    const Eigen::VectorXd theta = hp.to_vector();
    for (Index j = 0; j <= d; ++j) {
      Eigen::VectorXd hi = theta;
      Eigen::VectorXd lo = theta;
      hi(j) += 1e-5;
      lo(j) -= 1e-5;
      const Eigen::MatrixXd fd = (kernel_matrix(x, x, Hyperparameters::from_vector(hi)) -
                                  kernel_matrix(x, x, Hyperparameters::from_vector(lo))) / 2e-5;
      const Eigen::MatrixXd an = kernel_matrix_grad(x, hp, j);
      const double err = ((an - fd).array().abs() /
                          an.array().abs().max(fd.array().abs()).max(1e-4 * hp.signal_variance())).maxCoeff();
      check(err < 1e-6, "kernel gradient");
    }
  }

  // Aggregation properties.
  for (int c = 0; c < cases; ++c, ++counts[2], ++counts[3], ++counts[4]) {
    const double prior = std::exp(rng.uniform(-1.0, 1.0));
    const std::size_t m = 1 + rng.uniform_index(24);
    std::vector<Moments> e(m);
    double min_var = std::numeric_limits<double>::infinity();
    for (auto& x : e) {
      x.mean = rng.uniform(-2.0, 2.0);
      x.variance = prior * std::exp(rng.uniform(-8.0, 0.3));
      min_var = std::min(min_var, x.variance);
    }
    check(aggregate({Rule::kPoE, prior}, e).variance <= min_var * (1.0 + 1e-15), "PoE variance <= min expert variance");
    check(1.0 / aggregate({Rule::kRBCM, prior}, e).variance >= (1.0 - 1e-14) / prior, "rBCM precision >= prior precision");
    std::vector<Moments> shuffled = e;
    rng.shuffle(std::span<Moments>(shuffled));
    for (const Rule r : {Rule::kPoE, Rule::kGPoE, Rule::kRBCM}) {
      const Moments a = aggregate({r, prior}, e);
      const Moments b = aggregate({r, prior}, shuffled);
      check(std::abs(a.mean - b.mean) <= 1e-12 * (1.0 + std::abs(a.mean)) &&
                std::abs(a.variance - b.variance) <= 1e-12 * a.variance,
            "permutation invariance");
    }
  }

  // Determinism per seed: partitions, synthetic data, training and prediction.
  for (int c = 0; c < cases; ++c, ++counts[5]) {
    const std::uint64_t seed = rng.next_u64();
    const Dataset a = synthetic::robot_arm(60, seed);
    const Dataset b = synthetic::robot_arm(60, seed);
    const Partition pa = random_partition(a, 3, seed);
    const Partition pb = random_partition(b, 3, seed);
    bool same = a.inputs() == b.inputs() && a.targets() == b.targets();
    for (std::size_t k = 0; k < 3; ++k) same &= pa.views[k].indices() == pb.views[k].indices();
    if (c % 10 == 0) {
      TrainingConfig tc;
      tc.max_line_searches = 5;
      tc.seed = seed;
      const TrainingResult ta = train(a, 3, tc);
      const TrainingResult tb = train(b, 3, tc);
      same &= ta.hp == tb.hp;
      const Eigen::MatrixXd xs = a.inputs().topRows(10);
      const GraphPrediction ga = execute_parallel(build_graph(GraphSpec::flat(), fit_all(pa, ta.hp), Rule::kRBCM), xs, 2);
      const GraphPrediction gb = execute_parallel(build_graph(GraphSpec::flat(), fit_all(pb, tb.hp), Rule::kRBCM), xs, 2);
      same &= ga.mean == gb.mean && ga.variance == gb.variance;
    }
    check(same, "deterministic outputs per seed");
  }

  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = failures.empty() && secs < 300.0;
  v.summary = fmt("invariant suite: %zu violated properties, %.1f s (limit 300 s)", failures.size(), secs);
  v.details.push_back(fmt("cases: partition %d, kernel %d, PoE %d, rBCM %d, permutation %d, determinism %d",
                          counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]));
  for (const auto& f : failures) v.details.push_back("violated: " + f);
  v.details.push_back("module property tests: see the unit-test binaries registered with ctest");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, single_expert_exactness}, {2, graph_shape_invariance}, {3, gradient_correctness},
      {4, pathology},               {5, linear_scaling},         {6, kin40k_ordering},
      {7, invariant_suite}};

  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!wanted(id)) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("aborted: ") + e.what();
    }
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.summary << '\n';
    for (const auto& d : v.details) std::cout << "    " << d << '\n';
    if (id == 5) {
      Verdict soft = million_points_soft();
      std::cout << "criterion 5 (soft): " << (soft.pass ? "PASS" : "NOT MET") << "  " << soft.summary << '\n';
      for (const auto& d : soft.details) std::cout << "    " << d << '\n';
    }
    std::cout.flush();
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion/criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
