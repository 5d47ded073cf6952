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

#include "deltarank/lambdamart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deltarank/errors.hpp"
#include "deltarank/io.hpp"
#include "deltarank/rng.hpp"

namespace deltarank {

using nlohmann::json;

std::string_view to_string(LambdaWeighting w) {
  return w == LambdaWeighting::kNdcgGain ? "ndcg_gain" : "unweighted_pairwise";
}

LambdaWeighting parse_lambda_weighting(std::string_view text) {
  if (text == "ndcg_gain") return LambdaWeighting::kNdcgGain;
  if (text == "unweighted_pairwise") return LambdaWeighting::kUnweightedPairwise;
  throw ValidationError("unknown lambda weighting '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (n_trees < 0) throw ValidationError("n_trees must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ValidationError("learning_rate must be in (0, 1]");
  }
  if (max_leaves < 2) throw ValidationError("max_leaves must be >= 2");
  if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
  if (!(sigma > 0.0 && std::isfinite(sigma))) throw ValidationError("sigma must be > 0");
}

json TrainConfig::to_json() const {
  return {{"n_trees", n_trees},
          {"learning_rate", learning_rate},
          {"max_leaves", max_leaves},
          {"min_samples_leaf", min_samples_leaf},
          {"lambda_weighting", std::string(to_string(lambda_weighting))},
          {"sigma", sigma},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig cfg;
  cfg.n_trees = j.at("n_trees").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.max_leaves = j.at("max_leaves").get<int>();
  cfg.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  cfg.lambda_weighting = parse_lambda_weighting(j.at("lambda_weighting").get<std::string>());
  cfg.sigma = j.at("sigma").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

namespace {

// Ranks and ideal DCG shared by every pair of one list.
struct NdcgContext {
  std::vector<double> discount;  // per item, at its current rank
  double inverse_ideal = 0.0;    // 0 when the ideal DCG is 0

  NdcgContext(std::span<const int> labels, std::span<const double> scores) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    discount.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      discount[order[r]] = 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<int> ideal(labels.begin(), labels.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      idcg += gain(ideal[r]) / std::log2(static_cast<double>(r) + 2.0);
    }
    inverse_ideal = idcg > 0.0 ? 1.0 / idcg : 0.0;
  }

  static double gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }

  double swap_delta(std::span<const int> labels, std::size_t i, std::size_t j) const {
    return std::abs((gain(labels[i]) - gain(labels[j])) * (discount[i] - discount[j])) *
           inverse_ideal;
  }
};

void check_lengths(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ValidationError("labels and scores differ in length (" + std::to_string(labels.size()) +
                          " vs " + std::to_string(scores.size()) + ")");
  }
}

}  // namespace

double dcg_gain_delta(std::span<const int> labels, std::span<const double> scores, std::size_t i,
                      std::size_t j) {
  check_lengths(labels, scores);
  if (i >= labels.size() || j >= labels.size()) throw ValidationError("index out of range");
  if (i == j) return 0.0;
  return NdcgContext(labels, scores).swap_delta(labels, i, j);
}

void compute_lambdas(std::span<const int> labels, std::span<const double> scores,
                     const TrainConfig& cfg, std::span<double> lambdas,
                     std::span<double> hessians) {
  check_lengths(labels, scores);
  const std::size_t n = labels.size();
  if (lambdas.size() != n || hessians.size() != n) {
    throw ValidationError("lambda output spans have the wrong length");
  }
  std::fill(lambdas.begin(), lambdas.end(), 0.0);
  std::fill(hessians.begin(), hessians.end(), 0.0);
  if (n < 2) return;
  const bool any_variation =
      std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) != labels.end();
  if (!any_variation) return;

  const bool weighted = cfg.lambda_weighting == LambdaWeighting::kNdcgGain;
  std::optional<NdcgContext> ndcg;
  if (weighted) ndcg.emplace(labels, scores);
  const double sigma = cfg.sigma;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] <= labels[j]) continue;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double w = weighted ? ndcg->swap_delta(labels, i, j) : 1.0;
      const double lambda = sigma * rho * w;
      const double hess = sigma * sigma * rho * (1.0 - rho) * w;
      lambdas[i] += lambda;
      lambdas[j] -= lambda;
      hessians[i] += hess;
      hessians[j] += hess;
    }
  }
}

LambdaGradients compute_lambdas(std::span<const int> labels, std::span<const double> scores,
                                const TrainConfig& cfg) {
  LambdaGradients out;
  out.lambdas.resize(labels.size());
  out.hessians.resize(labels.size());
  compute_lambdas(labels, scores, cfg, out.lambdas, out.hessians);
  return out;
}

double pairwise_logistic_cost(std::span<const int> labels, std::span<const double> scores,
                              double sigma) {
  check_lengths(labels, scores);
  double cost = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[i] <= labels[j]) continue;
      const double x = -sigma * (scores[i] - scores[j]);
      // log1p(exp(x)) without overflow
      cost += x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
  }
  return cost;
}

LambdaMartModel::LambdaMartModel(std::vector<std::string> feature_names,
                                 std::vector<RegressionTree> trees, TrainConfig config)
    : feature_names_(std::move(feature_names)),
      trees_(std::move(trees)),
      config_(config),
      importance_(feature_names_.size(), 0.0) {}

void LambdaMartModel::set_feature_importance(std::vector<double> importance) {
  if (importance.size() != feature_names_.size()) {
    throw ValidationError("importance vector has the wrong size");
  }
  importance_ = std::move(importance);
}

double LambdaMartModel::score(std::span<const double> row) const {
  double s = 0.0;
  for (const auto& tree : trees_) s += config_.learning_rate * tree.predict(row);
  return s;
}

double LambdaMartModel::score(const Item& item) const {
  std::vector<double> row(feature_names_.size(), 0.0);
  for (std::size_t f = 0; f < feature_names_.size(); ++f) {
    auto it = item.numeric.find(feature_names_[f]);
    if (it != item.numeric.end() && it->second) row[f] = *it->second;
  }
  return score(row);
}

std::vector<double> LambdaMartModel::score_session(const QuerySession& session) const {
  std::vector<double> scores;
  scores.reserve(session.items.size());
  for (const auto& item : session.items) scores.push_back(score(item));
  return scores;
}

json LambdaMartModel::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  json importance = json::array();
  for (std::size_t f = 0; f < feature_names_.size(); ++f) {
    importance.push_back({{"feature", feature_names_[f]}, {"gain", importance_[f]}});
  }
  return {{"format", "deltarank-lambdamart-1"},
          {"feature_names", feature_names_},
          {"learning_rate", config_.learning_rate},
          {"config", config_.to_json()},
          {"fingerprint", fingerprint_},
          {"feature_importance", importance},
          {"tags", tags_},
          {"trees", trees}};
}

LambdaMartModel LambdaMartModel::from_json(const json& j) {
  try {
    if (j.value("format", "") != "deltarank-lambdamart-1") {
      throw ValidationError("not a deltarank model document");
    }
    TrainConfig cfg = TrainConfig::from_json(j.at("config"));
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    std::vector<RegressionTree> trees;
    for (const auto& jt : j.at("trees")) trees.push_back(RegressionTree::from_json(jt, names.size()));
    LambdaMartModel model(std::move(names), std::move(trees), cfg);
    std::vector<double> importance;
    for (const auto& e : j.at("feature_importance")) importance.push_back(e.at("gain").get<double>());
    model.set_feature_importance(std::move(importance));
    model.fingerprint_ = j.at("fingerprint").get<std::string>();
    model.tags_ = j.at("tags").get<std::map<std::string, std::string>>();
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

std::string LambdaMartModel::serialize() const { return to_json().dump() + "\n"; }

void save_model(const LambdaMartModel& model, const std::filesystem::path& path) {
  write_text_file(path, model.serialize());
}

LambdaMartModel load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("model file '" + path.string() + "' is not valid JSON");
  }
  return LambdaMartModel::from_json(j);
}

FeatureMatrix build_matrix(const Dataset& dataset, const std::vector<std::string>& names) {
  std::size_t rows = 0;
  for (const auto& s : dataset.sessions) rows += s.items.size();
  FeatureMatrix x(rows, names.size());
  std::size_t r = 0;
  for (const auto& s : dataset.sessions) {
    for (const auto& item : s.items) {
      for (std::size_t f = 0; f < names.size(); ++f) {
        auto it = item.numeric.find(names[f]);
        x.at(r, f) = (it != item.numeric.end() && it->second) ? *it->second : 0.0;
      }
      ++r;
    }
  }
  return x;
}

namespace {

std::string training_fingerprint(const Dataset& dataset, const FeatureMatrix& x,
                                 const std::vector<std::string>& names) {
  Fingerprint fp;
  for (const auto& name : names) fp.add(name);
  std::size_t r = 0;
  for (const auto& s : dataset.sessions) {
    fp.add(s.query_id);
    for (const auto& item : s.items) {
      fp.add(static_cast<std::int64_t>(item.label));
      for (std::size_t f = 0; f < x.cols(); ++f) fp.add(x.at(r, f));
      ++r;
    }
  }
  return fp.hex();
}

}  // namespace

LambdaMartModel train(const Dataset& train_set, const TrainConfig& cfg, TrainTrace* trace) {
  cfg.validate();
  if (!train_set.schema.all_numeric()) {
    throw ValidationError("train needs an all-numeric dataset (use to_numeric first)");
  }
  bool any_variation = false;
  for (const auto& s : train_set.sessions) {
    if (s.items.size() < 2) {
      throw ValidationError("session '" + s.query_id + "' has fewer than 2 items");
    }
    for (const auto& item : s.items) {
      if (item.label != s.items.front().label) any_variation = true;
    }
  }
  if (!any_variation) {
    throw TrainingImpossible("no session contains items with different labels");
  }

  std::vector<std::string> names;
  for (const auto& spec : train_set.schema.specs()) names.push_back(spec.name);
  const FeatureMatrix x = build_matrix(train_set, names);
  const std::size_t n = x.rows();

  std::vector<int> labels;
  labels.reserve(n);
  std::vector<std::size_t> offsets{0};
  for (const auto& s : train_set.sessions) {
    for (const auto& item : s.items) labels.push_back(item.label);
    offsets.push_back(labels.size());
  }

  std::vector<double> scores(n, 0.0), lambdas(n), hessians(n);
  auto objective = [&] {
    double total = 0.0;
    for (std::size_t q = 0; q + 1 < offsets.size(); ++q) {
      const std::size_t b = offsets[q], len = offsets[q + 1] - offsets[q];
      total += pairwise_logistic_cost(std::span(labels).subspan(b, len),
                                      std::span(scores).subspan(b, len), cfg.sigma);
    }
    return total;
  };
  if (trace) {
    trace->objective.clear();
    trace->objective.push_back(objective());
  }

  const TreeLearner learner(x, TreeParams{cfg.max_leaves, cfg.min_samples_leaf});
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(cfg.n_trees));
  std::vector<double> importance(names.size(), 0.0);
  for (int t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t q = 0; q + 1 < offsets.size(); ++q) {
      const std::size_t b = offsets[q], len = offsets[q + 1] - offsets[q];
      compute_lambdas(std::span(labels).subspan(b, len), std::span(scores).subspan(b, len), cfg,
                      std::span(lambdas).subspan(b, len), std::span(hessians).subspan(b, len));
    }
    RegressionTree tree = learner.fit(lambdas, hessians, &importance);
    for (std::size_t r = 0; r < n; ++r) scores[r] += cfg.learning_rate * tree.predict(x, r);
    trees.push_back(std::move(tree));
    if (trace) trace->objective.push_back(objective());
  }

  LambdaMartModel model(names, std::move(trees), cfg);
  model.set_feature_importance(std::move(importance));
  model.set_fingerprint(training_fingerprint(train_set, x, names));
  return model;
}

std::vector<std::size_t> rank_by_scores(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (auto& p : order) ++p;
  return order;
}

std::vector<std::size_t> predict_and_rank(const LambdaMartModel& model,
                                          const QuerySession& session) {
  return rank_by_scores(model.score_session(session));
}

}  // namespace deltarank
