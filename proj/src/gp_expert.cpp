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

#include "dgp/gp_expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "dgp/errors.hpp"

namespace dgp {

namespace {

// Pivots below this fraction of s^2 are treated as a failed factorization:
// LLT only rejects nonpositive pivots, but near-singular systems (duplicated
// inputs without noise) should go through the jitter path instead.
constexpr double kMinPivotRatio = 1e-14;

bool factorize(const Eigen::MatrixXd& a, double signal_variance, Eigen::MatrixXd& chol) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  chol = llt.matrixL();
  const Eigen::VectorXd diag = chol.diagonal();
  if (!diag.allFinite()) return false;
  return diag.array().square().minCoeff() > kMinPivotRatio * signal_variance;
}

constexpr Index kPredictBlock = 2048;

}  // namespace

ExpertState fit(const DataView& view, const Hyperparameters& hp) {
  if (view.size() < 1) throw std::invalid_argument("fit: empty data view");
  if (view.dim() != hp.dim()) {
    throw std::invalid_argument("fit: data has " + std::to_string(view.dim()) +
                                " features, hyperparameters " + std::to_string(hp.dim()));
  }
  if (!hp.all_finite()) throw NumericalError("fit: non-finite hyperparameters");

  ExpertState state(view, hp);
  const Eigen::MatrixXd x = view.gather_inputs();
  Eigen::MatrixXd ky = kernel_matrix(x, x, hp);
  ky.diagonal().array() += hp.noise_variance();

  const double sf2 = hp.signal_variance();
  double jitter = 0.0;
  bool ok = factorize(ky, sf2, state.chol_);
  for (double rel = kJitterStart; !ok && rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
    const double add = rel * sf2 - jitter;
    ky.diagonal().array() += add;
    jitter = rel * sf2;
    ok = factorize(ky, sf2, state.chol_);
  }
  if (!ok) {
    throw NumericalError("Cholesky factorization failed for " + std::to_string(view.size()) +
                         " points even with jitter " + std::to_string(kJitterMax) + " * s^2");
  }
  state.jitter_ = jitter;
  state.alpha_ = view.gather_targets();
  state.chol_.triangularView<Eigen::Lower>().solveInPlace(state.alpha_);
  state.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(state.alpha_);
  return state;
}

double log_marginal_likelihood(const ExpertState& state) {
  const Eigen::VectorXd y = state.view().gather_targets();
  const double log_det = 2.0 * state.chol().diagonal().array().log().sum();
  const auto n = static_cast<double>(state.size());
  return -0.5 * (y.dot(state.alpha()) + log_det + n * std::log(2.0 * std::numbers::pi));
}

LmlWithGradient lml_and_gradient(const ExpertState& state) {
  const Hyperparameters& hp = state.hyperparameters();
  const Index n = state.size();
  const Index dim = hp.dim();
  const Eigen::MatrixXd x = state.view().gather_inputs();

  // W = alpha alpha^T - (K + sigma^2 I)^-1, with the inverse assembled from
  // the triangular inverse of the Cholesky factor.
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
  state.chol().triangularView<Eigen::Lower>().solveInPlace(linv);
  Eigen::MatrixXd w(n, n);
  w.noalias() = -(linv.transpose() * linv.triangularView<Eigen::Lower>());
  w.noalias() += state.alpha() * state.alpha().transpose();

  // M = W .* K; every kernel derivative is K times a pairwise factor.
  const Eigen::MatrixXd k = kernel_matrix(x, x, hp);
  const Eigen::MatrixXd m = w.cwiseProduct(k);

  Eigen::VectorXd grad(hp.size());
  grad(0) = 0.5 * m.sum();
  for (Index d = 0; d < dim; ++d) {
    const Eigen::VectorXd col = x.col(d) / hp.lengthscale(d);
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double cj = col(j);
      double partial = 0.0;
      for (Index i = 0; i < j; ++i) {
        const double diff = col(i) - cj;
        partial += m(i, j) * diff * diff;
      }
      acc += partial;
    }
    // Upper triangle counted once; the diagonal has zero distance.
    grad(1 + d) = acc;
  }
  grad(hp.noise_index()) = hp.noise_variance() * w.trace();

  return {log_marginal_likelihood(state), std::move(grad)};
}

Eigen::VectorXd lml_gradient(const ExpertState& state) { return lml_and_gradient(state).gradient; }

MomentsBatch predict(const ExpertState& state, const Eigen::MatrixXd& x_test, VarianceKind kind) {
  const Hyperparameters& hp = state.hyperparameters();
  if (x_test.cols() != hp.dim()) {
    throw std::invalid_argument("predict: test inputs have " + std::to_string(x_test.cols()) +
                                " columns, model has " + std::to_string(hp.dim()));
  }
  const Eigen::MatrixXd x = state.view().gather_inputs();
  const double sf2 = hp.signal_variance();
  const double floor = std::numeric_limits<double>::epsilon() * sf2;
  const double extra = kind == VarianceKind::kObservation ? hp.noise_variance() : 0.0;

  const Index t = x_test.rows();
  MomentsBatch out{Eigen::VectorXd(t), Eigen::VectorXd(t)};
  for (Index start = 0; start < t; start += kPredictBlock) {
    const Index len = std::min(kPredictBlock, t - start);
    Eigen::MatrixXd ks = kernel_matrix(x, x_test.middleRows(start, len), hp);
    out.mean.segment(start, len).noalias() = ks.transpose() * state.alpha();
    state.chol().triangularView<Eigen::Lower>().solveInPlace(ks);
    const Eigen::VectorXd explained = ks.colwise().squaredNorm().transpose();
    for (Index i = 0; i < len; ++i) {
      out.variance(start + i) = std::clamp(sf2 - explained(i), floor, sf2) + extra;
    }
  }
  return out;
}

}  // namespace dgp
