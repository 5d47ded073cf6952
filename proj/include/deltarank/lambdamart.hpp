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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "deltarank/core.hpp"
#include "deltarank/tree.hpp"

namespace deltarank {

enum class LambdaWeighting { kNdcgGain, kUnweightedPairwise };

std::string_view to_string(LambdaWeighting w);
LambdaWeighting parse_lambda_weighting(std::string_view text);

struct TrainConfig {
  int n_trees = 300;
  double learning_rate = 0.1;
  int max_leaves = 31;
  int min_samples_leaf = 20;
  LambdaWeighting lambda_weighting = LambdaWeighting::kNdcgGain;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

  bool operator==(const TrainConfig&) const = default;
};

// |NDCG change| when items i and j trade places in the ordering induced by
// `scores` (descending, ties by index). Gain 2^label - 1, discount
// 1/log2(rank + 1), normalized by the ideal DCG of the full list; 0 when the
// ideal DCG is 0.
double dcg_gain_delta(std::span<const int> labels, std::span<const double> scores, std::size_t i,
                      std::size_t j);

struct LambdaGradients {
  std::vector<double> lambdas;
  std::vector<double> hessians;
};

// Per-item lambda (negative cost gradient) and second-order weight. For every
// pair with label_i > label_j:
//   rho = 1 / (1 + exp(sigma * (s_i - s_j)))
//   w   = |delta NDCG| (kNdcgGain) or 1 (kUnweightedPairwise)
//   lambda_i += sigma * rho * w,  lambda_j -= sigma * rho * w
//   h_i, h_j += sigma^2 * rho * (1 - rho) * w
LambdaGradients compute_lambdas(std::span<const int> labels, std::span<const double> scores,
                                const TrainConfig& cfg);

// Writes into caller-owned spans (zeroed first); used by the boosting loop.
void compute_lambdas(std::span<const int> labels, std::span<const double> scores,
                     const TrainConfig& cfg, std::span<double> lambdas, std::span<double> hessians);

// Sum over pairs with label_i > label_j of log(1 + exp(-sigma (s_i - s_j))).
double pairwise_logistic_cost(std::span<const int> labels, std::span<const double> scores,
                              double sigma);

class LambdaMartModel {
 public:
  LambdaMartModel() = default;
  LambdaMartModel(std::vector<std::string> feature_names, std::vector<RegressionTree> trees,
                  TrainConfig config);

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  double learning_rate() const { return config_.learning_rate; }
  const TrainConfig& config() const { return config_; }

  // Total split gain per feature over the ensemble.
  const std::vector<double>& feature_importance() const { return importance_; }
  void set_feature_importance(std::vector<double> importance);

  const std::string& fingerprint() const { return fingerprint_; }
  void set_fingerprint(std::string fp) { fingerprint_ = std::move(fp); }

  // Free-form string tags serialized with the model (e.g. run id).
  std::map<std::string, std::string>& tags() { return tags_; }
  const std::map<std::string, std::string>& tags() const { return tags_; }

  // sum_t learning_rate * tree_t(x); features in feature_names() order.
  double score(std::span<const double> row) const;
  // Looks features up by name; missing or absent numeric values count as 0.
  double score(const Item& item) const;
  std::vector<double> score_session(const QuerySession& session) const;

  nlohmann::json to_json() const;
  static LambdaMartModel from_json(const nlohmann::json& j);
  std::string serialize() const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<RegressionTree> trees_;
  TrainConfig config_;
  std::vector<double> importance_;
  std::string fingerprint_;
  std::map<std::string, std::string> tags_;
};

void save_model(const LambdaMartModel& model, const std::filesystem::path& path);
LambdaMartModel load_model(const std::filesystem::path& path);

// Training objective per round: objective[0] is before the first tree,
// objective[t] after t trees (summed unweighted pairwise logistic cost).
struct TrainTrace {
  std::vector<double> objective;
};

// Boosting loop over an all-numeric dataset. Scores start at 0; each round
// computes per-session lambdas, fits one tree to all items pooled and adds
// learning_rate * tree(x). Missing values enter as 0.
// Throws ValidationError for non-numeric schemas or sessions with fewer than
// 2 items, and TrainingImpossible if no session mixes labels.
LambdaMartModel train(const Dataset& train_set, const TrainConfig& cfg,
                      TrainTrace* trace = nullptr);

// 1-based impression positions in model rank order: result[r] is the
// position of the item ranked r+1. Ties keep impression order.
std::vector<std::size_t> predict_and_rank(const LambdaMartModel& model,
                                          const QuerySession& session);
std::vector<std::size_t> rank_by_scores(std::span<const double> scores);

// Column-major matrix of `names` over all items, session after session.
FeatureMatrix build_matrix(const Dataset& dataset, const std::vector<std::string>& names);

}  // namespace deltarank
