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

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace deltarank {

// Dense column-major matrix of item features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }
  double at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows_, rows_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TreeNode {
  // feature < 0 marks a leaf.
  int feature = -1;
  double threshold = 0.0;  // go left iff x <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  // Accessor for feature f of the sample being scored.
  template <typename Row>
    requires std::invocable<const Row&, std::size_t>
  double predict(const Row& row) const {
    int at = 0;
    while (!nodes_[at].is_leaf()) {
      const TreeNode& n = nodes_[at];
      at = row(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes_[at].value;
  }
  double predict(std::span<const double> row) const {
    return predict([&](std::size_t f) { return row[f]; });
  }
  double predict(const FeatureMatrix& x, std::size_t row) const {
    return predict([&](std::size_t f) { return x.at(row, f); });
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j, std::size_t n_features);

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_{TreeNode{}};
};

struct TreeParams {
  int max_leaves = 31;
  int min_samples_leaf = 20;
};

// Newton-step leaf value with a small damping term.
inline constexpr double kHessianDamping = 1e-9;

// Best-first regression tree learner over a fixed feature matrix. The
// per-feature sort orders are computed once and reused by every fit, which
// is what boosting needs.
//
// Split score is the variance gain on the gradients,
//   G_L^2/n_L + G_R^2/n_R - G^2/n,
// over every threshold between consecutive distinct values. The leaf with
// the largest available gain is split next, until max_leaves is reached or
// no split leaves min_samples_leaf on both sides with positive gain. Ties go
// to the lowest feature index, then the lowest threshold; ties between
// leaves go to the leaf created first.
class TreeLearner {
 public:
  TreeLearner(const FeatureMatrix& features, TreeParams params);

  // `gain_by_feature`, when given, must have cols() entries; the gain of each
  // split is added to its feature.
  RegressionTree fit(std::span<const double> gradients, std::span<const double> hessians,
                     std::vector<double>* gain_by_feature = nullptr) const;

 private:
  const FeatureMatrix& features_;
  TreeParams params_;
  std::vector<std::vector<std::uint32_t>> sorted_;  // per feature, rows by value
};

RegressionTree fit_tree(const FeatureMatrix& features, std::span<const double> gradients,
                        std::span<const double> hessians, TreeParams params);

}  // namespace deltarank
