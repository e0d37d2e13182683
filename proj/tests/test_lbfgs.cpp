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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "dgp/lbfgs.hpp"

namespace dgp::optim {
namespace {

using Eigen::Index;

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  g.setZero(x.size());
  double f = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x(i + 1) - x(i) * x(i);
    const double b = 1.0 - x(i);
    f += 100.0 * a * a + b * b;
    g(i) += -400.0 * a * x(i) - 2.0 * b;
    g(i + 1) += 200.0 * a;
  }
  return f;
}

TEST(Lbfgs, SolvesRosenbrock) {
  Eigen::VectorXd x0(4);
  x0 << -1.2, 1.0, -1.2, 1.0;
  LbfgsOptions opt;
  opt.max_iterations = 500;
  opt.gradient_tolerance = 1e-8;
  const LbfgsResult r = minimize(rosenbrock, x0, opt);
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_LT((r.x - Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.gradient.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lbfgs, SolvesIllConditionedQuadratic) {
  const Index n = 30;
  Eigen::VectorXd scale(n);
  for (Index i = 0; i < n; ++i) scale(i) = std::pow(10.0, 4.0 * static_cast<double>(i) / (n - 1));
  const auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = scale.cwiseProduct(x - Eigen::VectorXd::Ones(n));
    return 0.5 * (x - Eigen::VectorXd::Ones(n)).dot(g);
  };
  LbfgsOptions opt;
  opt.max_iterations = 1000;
  const LbfgsResult r = minimize(f, Eigen::VectorXd::Zero(n), opt);
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_LE(r.gradient.cwiseAbs().maxCoeff(), opt.gradient_tolerance);
}

TEST(Lbfgs, BudgetStopsEarly) {
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  LbfgsOptions opt;
  opt.max_iterations = 3;
  std::vector<IterationRecord> seen;
  const LbfgsResult r = minimize(rosenbrock, x0, opt, [&](const IterationRecord& rec) {
    seen.push_back(rec);
  });
  EXPECT_EQ(r.status, LbfgsStatus::kBudget);
  EXPECT_EQ(r.iterations, 3u);
  ASSERT_EQ(seen.size(), 4u);
  EXPECT_EQ(seen.front().iteration, 0u);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LT(seen[i].value, seen[i - 1].value);
}

TEST(Lbfgs, BacksOffFromInfeasiblePoints) {
  // log-barrier style objective, undefined for x <= 0.
  const auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    if (x(0) <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    g.resize(1);
    g(0) = 1.0 - 0.01 / x(0);
    return x(0) - 0.01 * std::log(x(0));
  };
  const LbfgsResult r = minimize(f, Eigen::VectorXd::Constant(1, 5.0), LbfgsOptions{});
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_NEAR(r.x(0), 0.01, 1e-6);
}

TEST(Lbfgs, WrongGradientFailsGracefullyWithBestPoint) {
  const auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = -x;  // points uphill
    return 0.5 * x.squaredNorm();
  };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(3, 2.0);
  const LbfgsResult r = minimize(f, x0, LbfgsOptions{});
  EXPECT_EQ(r.status, LbfgsStatus::kLineSearchFailed);
  EXPECT_LE(r.value, 0.5 * x0.squaredNorm());
}

TEST(Lbfgs, RejectsNonFiniteStart) {
  const auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = x;
    return std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(minimize(f, Eigen::VectorXd::Zero(2), LbfgsOptions{}), std::invalid_argument);
}

TEST(Lbfgs, ConvergedAtStart) {
  const auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  const LbfgsResult r = minimize(f, Eigen::VectorXd::Zero(2), LbfgsOptions{});
  EXPECT_EQ(r.status, LbfgsStatus::kConverged);
  EXPECT_EQ(r.iterations, 0u);
}

}  // namespace
}  // namespace dgp::optim
