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
#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace dgp {

/// Product-of-experts combination rules.
///  - kPoE:  precisions add, no prior correction.
///  - kGPoE: precisions weighted by beta_k = 1/M, no prior correction.
///  - kBCM:  precisions add, prior divided out (M - 1) times.
///  - kRBCM: entropy-weighted precisions, prior divided out
///           (sum beta_k - 1) times.
enum class Rule { kPoE, kGPoE, kBCM, kRBCM };

/// Accepts "poe", "gpoe", "bcm", "rbcm" (case-insensitive). Throws
/// std::invalid_argument for anything else.
Rule parse_rule(std::string_view name);
std::string_view rule_name(Rule rule);

struct AggregationRule {
  Rule variant = Rule::kRBCM;
  /// sigma_**^2, the prior variance k(x_*, x_*) = s^2 of the latent function.
  double prior_variance = 1.0;
};

/// Message passed between nodes of a computational graph: a Gaussian over
/// f_* plus the accumulated expert weight of the subtree that produced it.
/// A message with beta == 0 carries no information and is represented by the
/// prior.
struct GaussianPrediction {
  double mean = 0.0;
  double variance = 1.0;
  double beta = 0.0;
};

struct Moments {
  double mean = 0.0;
  double variance = 1.0;
};

/// Weight of one expert at one test point.
///   PoE, BCM: 1.   gPoE: 1/M.
///   rBCM: max(0, (log sigma_**^2 - log sigma_k^2) / 2), the prior-to-posterior
///         differential entropy reduction, clamped so that a posterior wider
///         than the prior (roundoff, heavy noise) is ignored rather than
///         subtracted.
/// Throws std::invalid_argument for sigma_k_sq <= 0 or num_experts == 0.
double expert_beta(const AggregationRule& rule, double sigma_k_sq, std::size_t num_experts);

/// Beta-weighted product of Gaussians (the gPoE combination):
///   precision = sum_k beta_k / sigma_k^2
///   mean      = sum_k (beta_k / sigma_k^2) mu_k / precision
///   beta      = sum_k beta_k
/// If every beta is zero the result is the prior with beta 0.
GaussianPrediction combine_product(std::span<const GaussianPrediction> children,
                                   double prior_variance);

/// Unweighted product of subtree messages whose weights were already
/// applied further down (PoE layers). Zero-beta children contribute nothing;
/// the output beta is the sum of child betas.
GaussianPrediction merge_subtrees(std::span<const GaussianPrediction> children,
                                  double prior_variance);

/// Root step. For BCM and rBCM the prior is divided out (beta - 1) times:
///   precision_out = 1/variance + (1 - beta) / sigma_**^2
///   mean_out      = (mean / variance) / precision_out
/// PoE and gPoE pass the product through. Throws NumericalError if the
/// corrected precision is not positive; `point_index`, when given, is
/// included in the message.
Moments apply_prior_correction(const GaussianPrediction& product, const AggregationRule& rule,
                               std::size_t point_index = std::numeric_limits<std::size_t>::max());

/// Flat one-shot aggregation of M expert predictions at one test point.
Moments aggregate(const AggregationRule& rule, std::span<const Moments> expert_predictions,
                  std::size_t point_index = std::numeric_limits<std::size_t>::max());

namespace detail {

/// Scaled precisions beyond this (relative to the prior precision) switch the
/// product to log-domain accumulation.
inline constexpr double kLogDomainThreshold = 1e12;

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace detail

}  // namespace dgp
