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

#include "dgp/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace dgp::optim {

namespace {

struct Point {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd gradient;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db); falls back to
// bisection when the interpolant is degenerate.
double cubic_step(const Point& a, const Point& b) {
  const double mid = 0.5 * (a.step + b.step);
  if (!std::isfinite(a.value) || !std::isfinite(b.value) || !std::isfinite(a.slope) ||
      !std::isfinite(b.slope)) {
    return mid;
  }
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double step = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  return std::isfinite(step) ? step : mid;
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
             double f0, double slope0, const LbfgsOptions& opt)
      : f_(f), x_(x), d_(direction), f0_(f0), slope0_(slope0), opt_(opt) {}

  /// Returns true and fills `accepted` when a strong-Wolfe step is found.
  bool run(double initial_step, Point& accepted) {
    Point prev{0.0, f0_, slope0_, {}};
    double step = initial_step;
    for (std::size_t i = 0; budget_left(); ++i) {
      Point cur = evaluate(step);
      if (!std::isfinite(cur.value) || cur.value > f0_ + opt_.c1 * step * slope0_ ||
          (i > 0 && cur.value >= prev.value)) {
        return zoom(prev, cur, accepted);
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, accepted);
      prev = std::move(cur);
      step *= 2.0;
    }
    return false;
  }

  std::size_t evaluations() const { return evaluations_; }
  /// Lowest finite value seen during the search (for the failure fallback).
  const Point* best() const { return best_.gradient.size() ? &best_ : nullptr; }

 private:
  bool budget_left() const { return evaluations_ < opt_.max_evaluations_per_search; }

  Point evaluate(double step) {
    Point p;
    p.step = step;
    p.gradient.resize(x_.size());
    p.value = f_(x_ + step * d_, p.gradient);
    ++evaluations_;
    if (std::isfinite(p.value) && p.gradient.allFinite()) {
      p.slope = p.gradient.dot(d_);
      if (p.value < best_value_) {
        best_value_ = p.value;
        best_ = p;
      }
    } else {
      p.value = std::numeric_limits<double>::infinity();
      p.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return p;
  }

  // lo satisfies sufficient decrease and has the lower value; the minimizer
  // lies between lo and hi.
  bool zoom(Point lo, Point hi, Point& accepted) {
    while (budget_left()) {
      const double lo_step = std::min(lo.step, hi.step);
      const double hi_step = std::max(lo.step, hi.step);
      const double width = hi_step - lo_step;
      if (width <= 1e-12 * std::max(1.0, hi_step)) return false;
      double step = cubic_step(lo, hi);
      step = std::clamp(step, lo_step + 0.1 * width, hi_step - 0.1 * width);
      Point cur = evaluate(step);
      if (!std::isfinite(cur.value) || cur.value > f0_ + opt_.c1 * step * slope0_ ||
          cur.value >= lo.value) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& d_;
  double f0_;
  double slope0_;
  const LbfgsOptions& opt_;
  std::size_t evaluations_ = 0;
  double best_value_ = std::numeric_limits<double>::infinity();
  Point best_;
};

double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

LbfgsResult minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options,
                     const std::function<void(const IterationRecord&)>& on_iteration) {
  if (options.memory < 1) throw std::invalid_argument("lbfgs: memory must be >= 1");
  if (!(options.gradient_tolerance > 0.0)) {
    throw std::invalid_argument("lbfgs: gradient tolerance must be positive");
  }

  LbfgsResult result;
  result.x = std::move(x0);
  result.gradient.resize(result.x.size());
  result.value = objective(result.x, result.gradient);
  result.evaluations = 1;
  if (!std::isfinite(result.value) || !result.gradient.allFinite()) {
    throw std::invalid_argument("lbfgs: objective is not finite at the starting point");
  }
  if (on_iteration) on_iteration({0, result.value, max_norm(result.gradient), 1});

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  result.status = LbfgsStatus::kBudget;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (max_norm(result.gradient) <= options.gradient_tolerance) {
      result.status = LbfgsStatus::kConverged;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = result.gradient;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alphas[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alphas[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alphas[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd direction = -q;
    double slope = direction.dot(result.gradient);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -result.gradient;
      slope = direction.dot(result.gradient);
    }
    const double initial_step =
        s_hist.empty() ? std::min(1.0, 1.0 / max_norm(result.gradient)) : 1.0;

    LineSearch search(objective, result.x, direction, result.value, slope, options);
    Point accepted;
    const bool ok = search.run(initial_step, accepted);
    result.evaluations += search.evaluations();
    if (!ok) {
      const Point* best = search.best();
      if (best && best->value < result.value) {
        result.x += best->step * direction;
        result.value = best->value;
        result.gradient = best->gradient;
      }
      result.status = LbfgsStatus::kLineSearchFailed;
      ++result.iterations;
      break;
    }

    Eigen::VectorXd s = accepted.step * direction;
    Eigen::VectorXd y = accepted.gradient - result.gradient;
    result.x += s;
    result.value = accepted.value;
    result.gradient = std::move(accepted.gradient);
    ++result.iterations;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (s_hist.size() == options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      rho_hist.push_back(1.0 / sy);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
    }
    if (on_iteration) {
      on_iteration({result.iterations, result.value, max_norm(result.gradient),
                    result.evaluations});
    }
  }
  if (result.status == LbfgsStatus::kBudget && options.max_iterations > 0 &&
      max_norm(result.gradient) <= options.gradient_tolerance) {
    result.status = LbfgsStatus::kConverged;
  }
  return result;
}

}  // namespace dgp::optim
