// Copyright 2026 The deltarank Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deltarank/tree.hpp"

#include <algorithm>
#include <numeric>

#include "deltarank/errors.hpp"

namespace deltarank {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ValidationError("tree needs at least one node");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) continue;
    auto valid = [&](int child) {
      return child > static_cast<int>(i) && child < static_cast<int>(nodes_.size());
    };
    if (!valid(n.left) || !valid(n.right)) {
      throw ValidationError("tree node " + std::to_string(i) + " has invalid children");
    }
  }
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

nlohmann::json RegressionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : nodes_) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return nodes;
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j, std::size_t n_features) {
  if (!j.is_array()) throw ValidationError("tree must be an array of nodes");
  std::vector<TreeNode> nodes;
  nodes.reserve(j.size());
  for (const auto& jn : j) {
    TreeNode n;
    if (jn.contains("leaf")) {
      n.value = jn.at("leaf").get<double>();
    } else {
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features) {
        throw ValidationError("tree split on unknown feature index " + std::to_string(n.feature));
      }
    }
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes));
}

TreeLearner::TreeLearner(const FeatureMatrix& features, TreeParams params)
    : features_(features), params_(params) {
  if (params_.max_leaves < 2) throw ValidationError("max_leaves must be >= 2");
  if (params_.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  sorted_.resize(features_.cols());
  for (std::size_t f = 0; f < features_.cols(); ++f) {
    auto& order = sorted_[f];
    order.resize(features_.rows());
    std::iota(order.begin(), order.end(), 0u);
    auto col = features_.column(f);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

namespace {

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  std::size_t n_left = 0;

  bool valid() const { return feature >= 0; }
};

struct OpenLeaf {
  int node;
  std::size_t begin;
  std::size_t end;
  double sum_grad;
  double sum_hess;
  Split best;
};

double split_point(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

}  // namespace

RegressionTree TreeLearner::fit(std::span<const double> gradients,
                                std::span<const double> hessians,
                                std::vector<double>* gain_by_feature) const {
  const std::size_t n = features_.rows();
  const std::size_t n_features = features_.cols();
  if (n == 0) throw ValidationError("fit_tree needs at least one sample");
  if (gradients.size() != n || hessians.size() != n) {
    throw ValidationError("gradient/hessian length does not match sample count");
  }
  if (gain_by_feature && gain_by_feature->size() != n_features) {
    throw ValidationError("gain_by_feature has the wrong size");
  }
  for (double h : hessians) {
    if (h < 0.0) throw ValidationError("hessians must be non-negative");
  }
  const std::size_t min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

  // Rows of each open leaf occupy the same range [begin, end) in every
  // per-feature order, kept sorted by that feature.
  std::vector<std::vector<std::uint32_t>> order = sorted_;
  std::vector<std::uint32_t> scratch(n);
  std::vector<char> goes_left(n, 0);

  auto find_best = [&](OpenLeaf& leaf) {
    leaf.best = Split{};
    const std::size_t count = leaf.end - leaf.begin;
    if (count < 2 * min_leaf || n_features == 0) return;
    const std::uint32_t* rows = order[0].data() + leaf.begin;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum_sq += gradients[rows[i]] * gradients[rows[i]];
    const double parent = leaf.sum_grad * leaf.sum_grad / static_cast<double>(count);
    const double min_gain = 1e-10 * sum_sq;
    for (std::size_t f = 0; f < n_features; ++f) {
      const std::uint32_t* idx = order[f].data() + leaf.begin;
      auto col = features_.column(f);
      if (col[idx[0]] == col[idx[count - 1]]) continue;
      double g_left = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        g_left += gradients[idx[i]];
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf) continue;
        if (count - n_left < min_leaf) break;
        const double lo = col[idx[i]];
        const double hi = col[idx[i + 1]];
        if (!(lo < hi)) continue;
        const double g_right = leaf.sum_grad - g_left;
        const double gain = g_left * g_left / static_cast<double>(n_left) +
                            g_right * g_right / static_cast<double>(count - n_left) - parent;
        if (gain > min_gain && gain > leaf.best.gain) {
          leaf.best = Split{gain, static_cast<int>(f), split_point(lo, hi), n_left};
        }
      }
    }
  };

  std::vector<TreeNode> nodes(1);
  std::vector<OpenLeaf> open;
  {
    OpenLeaf root{0, 0, n, 0.0, 0.0, {}};
    for (std::size_t i = 0; i < n; ++i) {
      root.sum_grad += gradients[i];
      root.sum_hess += hessians[i];
    }
    nodes[0].value = root.sum_grad / (root.sum_hess + kHessianDamping);
    find_best(root);
    open.push_back(root);
  }

  std::size_t n_leaves = 1;
  while (n_leaves < static_cast<std::size_t>(params_.max_leaves)) {
    std::size_t pick = open.size();
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].best.valid()) continue;
      if (pick == open.size() || open[i].best.gain > open[pick].best.gain) pick = i;
    }
    if (pick == open.size()) break;
    OpenLeaf leaf = open[pick];
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    const Split& split = leaf.best;

    auto split_col = features_.column(static_cast<std::size_t>(split.feature));
    for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
      const std::uint32_t row = order[0][i];
      goes_left[row] = split_col[row] <= split.threshold ? 1 : 0;
    }
    for (std::size_t f = 0; f < n_features; ++f) {
      auto& ord = order[f];
      std::size_t l = leaf.begin;
      std::size_t r = 0;
      for (std::size_t i = leaf.begin; i < leaf.end; ++i) {
        const std::uint32_t row = ord[i];
        if (goes_left[row]) {
          ord[l++] = row;
        } else {
          scratch[r++] = row;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(r),
                ord.begin() + static_cast<std::ptrdiff_t>(l));
    }
    const std::size_t mid = leaf.begin + split.n_left;

    OpenLeaf left{static_cast<int>(nodes.size()), leaf.begin, mid, 0.0, 0.0, {}};
    OpenLeaf right{static_cast<int>(nodes.size() + 1), mid, leaf.end, 0.0, 0.0, {}};
    for (std::size_t i = left.begin; i < left.end; ++i) {
      left.sum_grad += gradients[order[0][i]];
      left.sum_hess += hessians[order[0][i]];
    }
    for (std::size_t i = right.begin; i < right.end; ++i) {
      right.sum_grad += gradients[order[0][i]];
      right.sum_hess += hessians[order[0][i]];
    }

    TreeNode& parent = nodes[static_cast<std::size_t>(leaf.node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left.node;
    parent.right = right.node;
    parent.value = 0.0;
    if (gain_by_feature) (*gain_by_feature)[static_cast<std::size_t>(split.feature)] += split.gain;

    TreeNode left_node, right_node;
    left_node.value = left.sum_grad / (left.sum_hess + kHessianDamping);
    right_node.value = right.sum_grad / (right.sum_hess + kHessianDamping);
    nodes.push_back(left_node);
    nodes.push_back(right_node);

    find_best(left);
    find_best(right);
    open.push_back(left);
    open.push_back(right);
    ++n_leaves;
  }
  return RegressionTree(std::move(nodes));
}

RegressionTree fit_tree(const FeatureMatrix& features, std::span<const double> gradients,
                        std::span<const double> hessians, TreeParams params) {
  return TreeLearner(features, params).fit(gradients, hessians);
}

}  // namespace deltarank
