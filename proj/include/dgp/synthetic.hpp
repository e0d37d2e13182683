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

#include <cstddef>
#include <cstdint>

#include "dgp/dataset.hpp"
#include "dgp/kernel.hpp"

namespace dgp::synthetic {

/// Inputs uniform in [lo, hi]^D, latent values drawn jointly from the GP prior
/// with kernel hp, targets = latent + N(0, sigma_e^2). O(n^3).
Dataset sample_gp(std::size_t n, const Hyperparameters& hp, double lo, double hi,
                  std::uint64_t seed);

/// Same as sample_gp but also returns the noise-free latent values.
struct GpSample {
  Dataset data;
  Eigen::VectorXd latent;
};
GpSample sample_gp_with_latent(std::size_t n, const Hyperparameters& hp, double lo, double hi,
                               std::uint64_t seed);

/// 8-D regression problem modeled on robot-arm forward kinematics: eight
/// revolute joints with alternating axes, joint angles uniform in
/// [-pi/2, pi/2], target = distance of the end effector from a fixed point
/// plus N(0, noise_std^2). Different seeds draw new inputs from the same
/// underlying function.
inline constexpr Index kArmDim = 8;
Dataset robot_arm(std::size_t n, std::uint64_t seed, double noise_std = 0.1);

/// Noise-free end-effector distance for one joint configuration.
double robot_arm_distance(const Eigen::Ref<const Eigen::VectorXd>& angles);

/// Noise-free sine, y = sin(x), x uniform in [lo, hi] (1-D).
Dataset sinusoid(std::size_t n, double lo, double hi, std::uint64_t seed);

}  // namespace dgp::synthetic
