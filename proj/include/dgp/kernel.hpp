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

#include <cmath>

#include <Eigen/Core>
#include <json.hpp>

namespace dgp {

using Index = Eigen::Index;

/// Shared hyperparameters of the squared-exponential ARD kernel plus the
/// Gaussian noise level, all stored in the log domain:
///
///   k(x, x') = s^2 exp(-1/2 sum_d (x_d - x'_d)^2 / l_d^2),  noise sigma_e.
///
/// The flat vector layout used by gradients and the optimizer is
/// [log s^2, log l_1, ..., log l_D, log sigma_e].
struct Hyperparameters {
  double log_signal_variance = 0.0;
  Eigen::VectorXd log_lengthscales;
  double log_noise_std = std::log(0.1);

  Hyperparameters() = default;
  Hyperparameters(double log_sf2, Eigen::VectorXd log_ell, double log_sn);

  /// Isotropic convenience constructor from natural-scale values.
  static Hyperparameters from_natural(double signal_variance, double lengthscale,
                                      double noise_std, Index dim);

  Index dim() const { return log_lengthscales.size(); }
  Index size() const { return dim() + 2; }
  Index noise_index() const { return dim() + 1; }

  double signal_variance() const { return std::exp(log_signal_variance); }
  double lengthscale(Index d) const { return std::exp(log_lengthscales(d)); }
  Eigen::VectorXd lengthscales() const { return log_lengthscales.array().exp(); }
  double noise_std() const { return std::exp(log_noise_std); }
  double noise_variance() const { return std::exp(2.0 * log_noise_std); }

  Eigen::VectorXd to_vector() const;
  static Hyperparameters from_vector(const Eigen::VectorXd& v);

  bool all_finite() const;
  bool operator==(const Hyperparameters& other) const;
};

void to_json(nlohmann::json& j, const Hyperparameters& hp);
void from_json(const nlohmann::json& j, Hyperparameters& hp);

/// Cross-covariance k(A, B), n x m. Throws std::invalid_argument when the
/// column counts disagree with hp.dim().
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Hyperparameters& hp);

/// dK(A, A)/d(theta_j) for j = 0 (log s^2) or j = 1..D (log l_j). The noise
/// term is not part of the kernel; j = D + 1 is rejected.
///   dK/d(log s^2) = K
///   dK/d(log l_d) = K .* (Delta_d^2 / l_d^2)
Eigen::MatrixXd kernel_matrix_grad(const Eigen::MatrixXd& a, const Hyperparameters& hp,
                                   Index param_index);

namespace detail {

enum class DistanceMethod { kAuto, kPairwise, kExpanded };

/// Blocks with more rows than this on either side switch from direct
/// pairwise accumulation to the expanded |a|^2 + |b|^2 - 2 a.b form.
inline constexpr Index kExpandedDistanceThreshold = 4096;

/// Squared Euclidean distances between the rows of a and b (already scaled
/// by the lengthscales).
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  DistanceMethod method = DistanceMethod::kAuto);

}  // namespace detail

}  // namespace dgp
