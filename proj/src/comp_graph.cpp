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

#include "dgp/comp_graph.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>

#include <omp.h>

#include "dgp/errors.hpp"

namespace dgp {

GraphSpec GraphSpec::parse(std::string_view text) {
  if (text == "flat") return flat();
  GraphSpec spec;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dash = std::min(text.find('-', pos), text.size());
    const std::string_view token = text.substr(pos, dash - pos);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || value == 0) {
      throw std::invalid_argument("graph spec '" + std::string(text) +
                                  "': expected \"flat\" or positive integers like 32-32-32");
    }
    spec.branching.push_back(value);
    pos = dash + 1;
  }
  return spec;
}

std::string GraphSpec::to_string() const {
  if (is_flat()) return "flat";
  std::string out;
  for (std::size_t i = 0; i < branching.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(branching[i]);
  }
  return out;
}

void GraphSpec::validate(std::size_t num_experts) const {
  if (num_experts == 0) throw std::invalid_argument("graph: need at least one expert");
  if (is_flat()) return;
  std::size_t product = 1;
  for (const std::size_t b : branching) {
    if (b == 0) throw std::invalid_argument("graph: zero branching factor");
    if (product > std::numeric_limits<std::size_t>::max() / b) {
      throw std::invalid_argument("graph: branching product overflows");
    }
    product *= b;
  }
  if (product != num_experts) {
    throw std::invalid_argument("graph spec " + to_string() + " has " + std::to_string(product) +
                                " leaves but there are " + std::to_string(num_experts) +
                                " experts");
  }
}

std::size_t GraphNode::num_leaves() const {
  if (is_leaf()) return 1;
  std::size_t total = 0;
  for (const auto& c : children) total += c.num_leaves();
  return total;
}

std::size_t GraphNode::depth() const {
  std::size_t deepest = 0;
  for (const auto& c : children) deepest = std::max(deepest, c.depth());
  return is_leaf() ? 0 : deepest + 1;
}

namespace {

void validate_node(const GraphNode& node, bool is_root, std::vector<int>& seen) {
  if (node.is_leaf()) {
    if (is_root) throw std::invalid_argument("graph: root cannot be a leaf");
    if (node.expert >= seen.size()) {
      throw std::invalid_argument("graph: leaf references unknown expert " +
                                  std::to_string(node.expert));
    }
    if (seen[node.expert]++) {
      throw std::invalid_argument("graph: expert " + std::to_string(node.expert) +
                                  " appears more than once");
    }
    return;
  }
  if (node.children.empty()) throw std::invalid_argument("graph: internal node without children");
  if ((node.kind == GraphNode::Kind::kRoot) != is_root) {
    throw std::invalid_argument("graph: exactly the top node must be the root");
  }
  const bool leaf_children = node.children.front().is_leaf();
  for (const auto& c : node.children) {
    if (c.is_leaf() != leaf_children) {
      throw std::invalid_argument("graph: node mixes leaf and internal children");
    }
  }
  if (!is_root) {
    const auto expected =
        leaf_children ? GraphNode::Kind::kWeightedProduct : GraphNode::Kind::kProduct;
    if (node.kind != expected) {
      throw std::invalid_argument(
          "graph: nodes above leaves must be weighted products, higher nodes products");
    }
  }
  for (const auto& c : node.children) validate_node(c, false, seen);
}

GraphNode build_level(const std::vector<std::size_t>& branching, std::size_t level,
                      std::size_t& next_expert) {
  const std::size_t count = branching[level];
  const bool last = level + 1 == branching.size();
  std::vector<GraphNode> children;
  children.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    children.push_back(last ? GraphNode::leaf(next_expert++)
                            : build_level(branching, level + 1, next_expert));
  }
  const auto kind = level == 0 ? GraphNode::Kind::kRoot
                               : (last ? GraphNode::Kind::kWeightedProduct
                                       : GraphNode::Kind::kProduct);
  return GraphNode::internal(kind, std::move(children));
}

}  // namespace

ComputationGraph::ComputationGraph(GraphNode root, std::vector<ExpertState> experts,
                                   AggregationRule rule)
    : root_(std::move(root)), experts_(std::move(experts)), rule_(rule) {
  if (experts_.empty()) throw std::invalid_argument("graph: no experts");
  const Hyperparameters& hp = experts_.front().hyperparameters();
  for (const auto& e : experts_) {
    if (!(e.hyperparameters() == hp)) {
      throw std::invalid_argument("graph: experts must share one hyperparameter set");
    }
  }
  std::vector<int> seen(experts_.size(), 0);
  validate_node(root_, true, seen);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("graph: some experts are not attached to any leaf");
  }
}

ComputationGraph build_graph(const GraphSpec& spec, std::vector<ExpertState> experts, Rule rule) {
  spec.validate(experts.size());
  if (experts.empty()) throw std::invalid_argument("graph: no experts");
  const AggregationRule agg{rule, experts.front().hyperparameters().signal_variance()};
  std::vector<std::size_t> branching = spec.is_flat()
                                           ? std::vector<std::size_t>{experts.size()}
                                           : spec.branching;
  std::size_t next = 0;
  GraphNode root = build_level(branching, 0, next);
  return ComputationGraph(std::move(root), std::move(experts), agg);
}

namespace {

struct MessageBatch {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd beta;
};

void leaf_message_into(const ComputationGraph& graph, std::size_t expert,
                       const Eigen::MatrixXd& x_block, MessageBatch& out, Index offset) {
  const MomentsBatch pred = predict(graph.experts()[expert], x_block, VarianceKind::kLatent);
  const std::size_t m = graph.num_experts();
  for (Index i = 0; i < pred.size(); ++i) {
    out.mean(offset + i) = pred.mean(i);
    out.variance(offset + i) = pred.variance(i);
    out.beta(offset + i) = expert_beta(graph.rule(), pred.variance(i), m);
  }
}

MessageBatch make_batch(Index t) {
  return {Eigen::VectorXd(t), Eigen::VectorXd(t), Eigen::VectorXd(t)};
}

// Runs body(i) for i in [0, n), optionally on an OpenMP team, and rethrows
// the exception raised at the lowest index.
void for_each_point(Index n, int workers, const std::function<void(Index)>& body) {
  Index failed_at = n;
  std::exception_ptr failure;
  std::mutex lock;
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
  for (Index i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> guard(lock);
      if (i < failed_at) {
        failed_at = i;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Reduces one internal node from its children's batches.
MessageBatch combine_node(const GraphNode& node, const std::vector<MessageBatch>& children,
                          const AggregationRule& rule, Index t, int workers) {
  const bool weighted = node.children.front().is_leaf();
  MessageBatch out = make_batch(t);
  for_each_point(t, workers, [&](Index i) {
    std::vector<GaussianPrediction> msgs(children.size());
    for (std::size_t c = 0; c < children.size(); ++c) {
      msgs[c] = {children[c].mean(i), children[c].variance(i), children[c].beta(i)};
    }
    const GaussianPrediction g = weighted ? combine_product(msgs, rule.prior_variance)
                                          : merge_subtrees(msgs, rule.prior_variance);
    out.mean(i) = g.mean;
    out.variance(i) = g.variance;
    out.beta(i) = g.beta;
  });
  return out;
}

using LeafSource = std::function<MessageBatch(std::size_t expert)>;

MessageBatch reduce(const GraphNode& node, const LeafSource& leaf, const AggregationRule& rule,
                    Index t, int workers) {
  std::vector<MessageBatch> children;
  children.reserve(node.children.size());
  for (const auto& c : node.children) {
    children.push_back(c.is_leaf() ? leaf(c.expert) : reduce(c, leaf, rule, t, workers));
  }
  return combine_node(node, children, rule, t, workers);
}

GraphPrediction finish(const ComputationGraph& graph, const MessageBatch& product, Index t,
                       int workers) {
  GraphPrediction out{Eigen::VectorXd(t), Eigen::VectorXd(t), product.beta};
  for_each_point(t, workers, [&](Index i) {
    const Moments m = apply_prior_correction(
        {product.mean(i), product.variance(i), product.beta(i)}, graph.rule(),
        static_cast<std::size_t>(i));
    out.mean(i) = m.mean;
    out.variance(i) = m.variance;
  });
  return out;
}

void check_test_inputs(const ComputationGraph& graph, const Eigen::MatrixXd& x_test) {
  if (x_test.cols() != graph.dim()) {
    throw std::invalid_argument("graph prediction: test inputs have " +
                                std::to_string(x_test.cols()) + " columns, model has " +
                                std::to_string(graph.dim()));
  }
}

constexpr Index kLeafBlock = 512;

}  // namespace

GraphPrediction predict_graph(const ComputationGraph& graph, const Eigen::MatrixXd& x_test) {
  check_test_inputs(graph, x_test);
  const Index t = x_test.rows();
  const LeafSource leaf = [&](std::size_t expert) {
    MessageBatch batch = make_batch(t);
    try {
      leaf_message_into(graph, expert, x_test, batch, 0);
    } catch (const std::exception& e) {
      throw ExpertError(expert, e.what());
    }
    return batch;
  };
  const MessageBatch product = reduce(graph.root(), leaf, graph.rule(), t, 1);
  return finish(graph, product, t, 1);
}

GraphPrediction execute_parallel(const ComputationGraph& graph, const Eigen::MatrixXd& x_test,
                                 int workers) {
  if (workers < 1) throw std::invalid_argument("execute_parallel: workers must be >= 1");
  check_test_inputs(graph, x_test);
  const Index t = x_test.rows();
  const std::size_t m = graph.num_experts();
  const Index blocks = std::max<Index>(1, (t + kLeafBlock - 1) / kLeafBlock);
  const auto tasks = static_cast<Index>(m) * blocks;

  std::vector<MessageBatch> leaves(m);
  for (auto& b : leaves) b = make_batch(t);

  std::size_t failed_expert = m;
  std::string failure;
  std::mutex lock;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (Index task = 0; task < tasks; ++task) {
    const auto expert = static_cast<std::size_t>(task / blocks);
    const Index start = (task % blocks) * kLeafBlock;
    const Index len = std::min(kLeafBlock, t - start);
    if (len <= 0) continue;
    try {
      leaf_message_into(graph, expert, x_test.middleRows(start, len), leaves[expert], start);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> guard(lock);
      if (expert < failed_expert) {
        failed_expert = expert;
        failure = e.what();
      }
    }
  }
  if (failed_expert < m) throw ExpertError(failed_expert, failure);

  const LeafSource leaf = [&](std::size_t expert) { return leaves[expert]; };
  const MessageBatch product = reduce(graph.root(), leaf, graph.rule(), t, workers);
  return finish(graph, product, t, workers);
}

}  // namespace dgp
