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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dgp/aggregation.hpp"
#include "dgp/gp_expert.hpp"

namespace dgp {

/// Uniform branching factors per tree level, root first. An empty list is
/// the flat (single-layer) graph: one root directly above all experts.
/// "8-4" is a root with 8 children, each responsible for 4 experts.
struct GraphSpec {
  std::vector<std::size_t> branching;

  static GraphSpec flat() { return {}; }
  /// "flat" or dash-separated positive integers such as "32-32-32".
  /// Throws std::invalid_argument on malformed input.
  static GraphSpec parse(std::string_view text);

  bool is_flat() const { return branching.empty(); }
  std::string to_string() const;
  /// Throws std::invalid_argument unless the branching product equals
  /// num_experts (flat accepts any num_experts >= 1).
  void validate(std::size_t num_experts) const;
};

/// Node of a computational tree. Leaves reference experts by index.
///  - kWeightedProduct: directly above leaves, applies expert weights (gPoE).
///  - kProduct:         above other internal nodes, unweighted product (PoE).
///  - kRoot:            top node; combines its children like the layer it
///                      sits in and then applies the prior correction.
struct GraphNode {
  enum class Kind { kLeaf, kWeightedProduct, kProduct, kRoot };

  Kind kind = Kind::kLeaf;
  std::vector<GraphNode> children;
  std::size_t expert = 0;

  static GraphNode leaf(std::size_t expert_index) { return {Kind::kLeaf, {}, expert_index}; }
  static GraphNode internal(Kind kind, std::vector<GraphNode> children) {
    return {kind, std::move(children), 0};
  }

  bool is_leaf() const { return kind == Kind::kLeaf; }
  std::size_t num_leaves() const;
  std::size_t depth() const;
};

/// A validated tree over fitted experts that share one hyperparameter set.
class ComputationGraph {
 public:
  /// Arbitrary (possibly heterogeneous) trees are accepted as long as every
  /// expert appears exactly once as a leaf, nodes do not mix leaf and
  /// internal children, and node kinds follow the layering above.
  ComputationGraph(GraphNode root, std::vector<ExpertState> experts, AggregationRule rule);

  const GraphNode& root() const { return root_; }
  const std::vector<ExpertState>& experts() const { return experts_; }
  const AggregationRule& rule() const { return rule_; }
  std::size_t num_experts() const { return experts_.size(); }
  Index dim() const { return experts_.front().hyperparameters().dim(); }

 private:
  GraphNode root_;
  std::vector<ExpertState> experts_;
  AggregationRule rule_;
};

/// Expert k goes to leaf position k in depth-first order, so consecutive
/// experts share parents.
ComputationGraph build_graph(const GraphSpec& spec, std::vector<ExpertState> experts,
                             Rule rule);

struct GraphPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  /// Sum of leaf weights reaching the root, per test point.
  Eigen::VectorXd beta;

  Index size() const { return mean.size(); }
};

/// Latent (f_*) predictions; serial depth-first evaluation. Reference
/// implementation for execute_parallel.
GraphPrediction predict_graph(const ComputationGraph& graph, const Eigen::MatrixXd& x_test);

/// Same result as predict_graph, evaluating (expert x test-block) leaf tasks
/// and the per-point reductions on an OpenMP team of `workers` threads. Child
/// order at every node is fixed, so the result matches the serial path.
/// Expert failures surface as ExpertError carrying the lowest failing id.
GraphPrediction execute_parallel(const ComputationGraph& graph, const Eigen::MatrixXd& x_test,
                                 int workers);

}  // namespace dgp
