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

#include <Eigen/Core>

#include "dgp/dataset.hpp"
#include "dgp/kernel.hpp"

namespace dgp {

/// Whether predictive variances describe the latent function f_* or a noisy
/// observation y_* = f_* + eps (adds sigma_e^2).
enum class VarianceKind { kLatent, kObservation };

/// Per-point predictive moments for a batch of test inputs.
struct MomentsBatch {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;

  Index size() const { return mean.size(); }
};

/// Exact GP conditioned on one DataView under fixed hyperparameters. Holds
/// the lower Cholesky factor L of K + (sigma_e^2 + jitter) I and
/// alpha = (K + sigma_e^2 I)^-1 y. Immutable once fitted; safe to share
/// across threads.
class ExpertState {
 public:
  const DataView& view() const { return view_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  /// Diagonal jitter that was needed for the factorization (0 if none).
  double jitter() const { return jitter_; }
  Index size() const { return view_.size(); }

 private:
  friend ExpertState fit(const DataView& view, const Hyperparameters& hp);

  ExpertState(DataView view, Hyperparameters hp) : view_(std::move(view)), hp_(std::move(hp)) {}

  DataView view_;
  Hyperparameters hp_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// Jitter escalation for the Cholesky factorization, relative to s^2.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

/// Factorizes K + sigma_e^2 I for the view. If the factorization fails the
/// diagonal is bumped by 1e-10 s^2, escalating x10 up to 1e-4 s^2; after
/// that a NumericalError is thrown. O(n^3) time, O(n^2) memory.
ExpertState fit(const DataView& view, const Hyperparameters& hp);

/// log p(y | X, theta) including the -n/2 log(2 pi) constant.
double log_marginal_likelihood(const ExpertState& state);

/// Gradient of log_marginal_likelihood with respect to the log-domain
/// hyperparameter vector [log s^2, log l_1..D, log sigma_e].
Eigen::VectorXd lml_gradient(const ExpertState& state);

struct LmlWithGradient {
  double value;
  Eigen::VectorXd gradient;
};

/// Both quantities from one factorization.
LmlWithGradient lml_and_gradient(const ExpertState& state);

/// Predictive mean and variance at each row of x_test. Latent variances are
/// clamped to [eps * s^2, s^2].
MomentsBatch predict(const ExpertState& state, const Eigen::MatrixXd& x_test,
                     VarianceKind kind = VarianceKind::kLatent);

}  // namespace dgp
