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

#include "dgp/aggregation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dgp/errors.hpp"

namespace dgp {

Rule parse_rule(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "poe") return Rule::kPoE;
  if (lower == "gpoe") return Rule::kGPoE;
  if (lower == "bcm") return Rule::kBCM;
  if (lower == "rbcm") return Rule::kRBCM;
  throw std::invalid_argument("unknown aggregation rule '" + std::string(name) +
                              "' (expected poe, gpoe, bcm or rbcm)");
}

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::kPoE: return "poe";
    case Rule::kGPoE: return "gpoe";
    case Rule::kBCM: return "bcm";
    case Rule::kRBCM: return "rbcm";
  }
  return "?";
}

double expert_beta(const AggregationRule& rule, double sigma_k_sq, std::size_t num_experts) {
  if (!(sigma_k_sq > 0.0)) {
    throw std::invalid_argument("expert_beta: expert variance must be positive");
  }
  if (num_experts == 0) throw std::invalid_argument("expert_beta: no experts");
  switch (rule.variant) {
    case Rule::kPoE:
    case Rule::kBCM: return 1.0;
    case Rule::kGPoE: return 1.0 / static_cast<double>(num_experts);
    case Rule::kRBCM:
      return std::max(0.0, 0.5 * (std::log(rule.prior_variance) - std::log(sigma_k_sq)));
  }
  return 1.0;
}

namespace detail {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (const double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace detail

namespace {

// Product of Gaussians with per-child weights (weight = beta for the
// weighted layer, 1 for subtree merges). Children with zero weight or zero
// beta are skipped.
GaussianPrediction weighted_product(std::span<const GaussianPrediction> children,
                                    double prior_variance, bool use_beta) {
  if (children.empty()) throw std::invalid_argument("combine: no children");
  std::vector<double> weights;
  std::vector<double> log_w;
  std::vector<double> means;
  std::vector<double> betas;
  weights.reserve(children.size());
  log_w.reserve(children.size());
  means.reserve(children.size());
  betas.reserve(children.size());
  double max_log_w = -std::numeric_limits<double>::infinity();
  for (const auto& c : children) {
    if (!(c.variance > 0.0) || !std::isfinite(c.variance)) {
      throw std::invalid_argument("combine: child variance must be positive and finite");
    }
    if (!(c.beta >= 0.0)) throw std::invalid_argument("combine: negative beta");
    betas.push_back(c.beta);
    if (c.beta == 0.0) continue;
    const double weight = use_beta ? c.beta : 1.0;
    weights.push_back(weight / c.variance);
    log_w.push_back(std::log(weight) - std::log(c.variance));
    means.push_back(c.mean);
    max_log_w = std::max(max_log_w, log_w.back());
  }
  const double beta = detail::pairwise_sum(betas);
  if (weights.empty()) return {0.0, prior_variance, 0.0};

  // Precisions far above the prior precision: accumulate relative to the
  // largest term so that neither sum overflows.
  const bool log_domain =
      max_log_w + std::log(prior_variance) > std::log(detail::kLogDomainThreshold);
  if (log_domain) {
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::exp(log_w[i] - max_log_w);
  }
  std::vector<double> weighted_means(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weighted_means[i] = weights[i] * means[i];
  const double precision = detail::pairwise_sum(weights);
  const double mean = detail::pairwise_sum(weighted_means) / precision;
  const double variance =
      log_domain ? std::exp(-(std::log(precision) + max_log_w)) : 1.0 / precision;
  return {mean, variance, beta};
}

}  // namespace

GaussianPrediction combine_product(std::span<const GaussianPrediction> children,
                                   double prior_variance) {
  return weighted_product(children, prior_variance, /*use_beta=*/true);
}

GaussianPrediction merge_subtrees(std::span<const GaussianPrediction> children,
                                  double prior_variance) {
  return weighted_product(children, prior_variance, /*use_beta=*/false);
}

Moments apply_prior_correction(const GaussianPrediction& product, const AggregationRule& rule,
                               std::size_t point_index) {
  if (product.beta == 0.0) return {0.0, rule.prior_variance};
  if (rule.variant == Rule::kPoE || rule.variant == Rule::kGPoE) {
    return {product.mean, product.variance};
  }
  const double product_precision = 1.0 / product.variance;
  const double precision = product_precision + (1.0 - product.beta) / rule.prior_variance;
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    std::string where = point_index == std::numeric_limits<std::size_t>::max()
                            ? std::string()
                            : " at test point " + std::to_string(point_index);
    throw NumericalError(std::string(rule_name(rule.variant)) +
                         ": corrected precision is not positive" + where + " (" +
                         std::to_string(precision) + ")");
  }
  return {product_precision * product.mean / precision, 1.0 / precision};
}

Moments aggregate(const AggregationRule& rule, std::span<const Moments> expert_predictions,
                  std::size_t point_index) {
  const std::size_t m = expert_predictions.size();
  if (m == 0) throw std::invalid_argument("aggregate: no expert predictions");
  std::vector<GaussianPrediction> leaves;
  leaves.reserve(m);
  for (const auto& p : expert_predictions) {
    leaves.push_back({p.mean, p.variance, expert_beta(rule, p.variance, m)});
  }
  return apply_prior_correction(combine_product(leaves, rule.prior_variance), rule, point_index);
}

}  // namespace dgp
