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

#include "dgp/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "dgp/errors.hpp"
#include "dgp/random.hpp"

namespace dgp::synthetic {

GpSample sample_gp_with_latent(std::size_t n, const Hyperparameters& hp, double lo, double hi,
                               std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_gp: n must be positive");
  Rng rng(seed);
  const auto rows = static_cast<Index>(n);
  Eigen::MatrixXd x(rows, hp.dim());
  for (Index i = 0; i < rows; ++i) {
    for (Index d = 0; d < hp.dim(); ++d) x(i, d) = rng.uniform(lo, hi);
  }
  Eigen::MatrixXd k = kernel_matrix(x, x, hp);
  k.diagonal().array() += 1e-8 * hp.signal_variance();
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_gp: prior covariance not PD");
  Eigen::VectorXd z(rows);
  for (Index i = 0; i < rows; ++i) z(i) = rng.normal();
  Eigen::VectorXd latent = llt.matrixL() * z;
  Eigen::VectorXd y = latent;
  for (Index i = 0; i < rows; ++i) y(i) += hp.noise_std() * rng.normal();
  return {Dataset(std::move(x), std::move(y)), std::move(latent)};
}

Dataset sample_gp(std::size_t n, const Hyperparameters& hp, double lo, double hi,
                  std::uint64_t seed) {
  return sample_gp_with_latent(n, hp, lo, hi, seed).data;
}

double robot_arm_distance(const Eigen::Ref<const Eigen::VectorXd>& angles) {
  static constexpr std::array<double, kArmDim> kLinks = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2};
  const Eigen::Vector3d target(1.2, 0.8, 0.6);
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  for (Index j = 0; j < kArmDim; ++j) {
    const Eigen::Vector3d axis = (j % 2 == 0) ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
    frame = frame * Eigen::AngleAxisd(angles(j), axis).toRotationMatrix();
    position += kLinks[static_cast<std::size_t>(j)] * frame.col(0);
  }
  return (position - target).norm();
}

Dataset robot_arm(std::size_t n, std::uint64_t seed, double noise_std) {
  if (n == 0) throw std::invalid_argument("robot_arm: n must be positive");
  Rng rng(seed);
  const auto rows = static_cast<Index>(n);
  Eigen::MatrixXd x(rows, kArmDim);
  Eigen::VectorXd y(rows);
  for (Index i = 0; i < rows; ++i) {
    for (Index d = 0; d < kArmDim; ++d) {
      x(i, d) = rng.uniform(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    }
    y(i) = robot_arm_distance(x.row(i).transpose()) + noise_std * rng.normal();
  }
  return Dataset(std::move(x), std::move(y));
}

Dataset sinusoid(std::size_t n, double lo, double hi, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sinusoid: n must be positive");
  Rng rng(seed);
  const auto rows = static_cast<Index>(n);
  Eigen::MatrixXd x(rows, 1);
  Eigen::VectorXd y(rows);
  for (Index i = 0; i < rows; ++i) {
    x(i, 0) = rng.uniform(lo, hi);
    y(i) = std::sin(x(i, 0));
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace dgp::synthetic
