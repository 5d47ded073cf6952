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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deltarank/errors.hpp"
#include "deltarank/evaluation.hpp"
#include "deltarank/io.hpp"
#include "deltarank/lambdamart.hpp"
#include "test_util.hpp"

namespace deltarank {
namespace {

TrainConfig unweighted() {
  TrainConfig c;
  c.lambda_weighting = LambdaWeighting::kUnweightedPairwise;
  return c;
}

// NDCG of the whole list when items are presented in `order` (indices).
double ndcg_of_order(const std::vector<int>& labels, const std::vector<std::size_t>& order) {
  double dcg = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    dcg += (std::pow(2.0, labels[order[r]]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  std::vector<int> ideal = labels;
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal.size(); ++r) {
    idcg += (std::pow(2.0, ideal[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

// Order by score descending, ties by index; swap the two items' positions
// and recompute the full NDCG.
double brute_force_delta(const std::vector<int>& labels, const std::vector<double>& scores,
                         std::size_t i, std::size_t j) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double before = ndcg_of_order(labels, order);
  auto pi = std::find(order.begin(), order.end(), i);
  auto pj = std::find(order.begin(), order.end(), j);
  std::iter_swap(pi, pj);
  return std::fabs(ndcg_of_order(labels, order) - before);
}

TEST(DcgGainDeltaTest, HandExample) {
  const std::vector<int> labels{1, 0};
  const std::vector<double> scores{0.0, 1.0};
  EXPECT_NEAR(dcg_gain_delta(labels, scores, 0, 1), 0.369070, 1e-6);
  EXPECT_DOUBLE_EQ(dcg_gain_delta(labels, scores, 0, 1), 1.0 - 1.0 / std::log2(3.0));
}

TEST(DcgGainDeltaTest, EqualLabelsGiveZero) {
  const std::vector<int> labels{1, 1, 1, 1};
  const std::vector<double> scores{0.3, -1, 2, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) EXPECT_EQ(dcg_gain_delta(labels, scores, i, j), 0.0);
    }
  }
  const std::vector<int> zeros{0, 0, 0};
  const std::vector<double> s3{1, 2, 3};
  EXPECT_EQ(dcg_gain_delta(zeros, s3, 0, 2), 0.0);
}

TEST(DcgGainDeltaTest, MatchesBruteForcePermutation) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.uniform_index(9);
    std::vector<int> labels(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.uniform_index(3));
      // Coarse scores force ties.
      scores[i] = static_cast<double>(rng.uniform_index(4));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = dcg_gain_delta(labels, scores, i, j);
        EXPECT_NEAR(d, brute_force_delta(labels, scores, i, j), 1e-12);
        EXPECT_EQ(d, dcg_gain_delta(labels, scores, j, i));
        EXPECT_GE(d, 0.0);
      }
    }
  }
}

TEST(ComputeLambdasTest, HandExample) {
  const std::vector<int> labels{1, 0};
  const std::vector<double> scores{0.0, 0.0};
  LambdaGradients g = compute_lambdas(labels, scores, unweighted());
  EXPECT_DOUBLE_EQ(g.lambdas[0], 0.5);
  EXPECT_DOUBLE_EQ(g.lambdas[1], -0.5);
  EXPECT_DOUBLE_EQ(g.hessians[0], 0.25);
  EXPECT_DOUBLE_EQ(g.hessians[1], 0.25);
}

TEST(ComputeLambdasTest, EqualLabelsGiveZero) {
  const std::vector<int> labels{2, 2, 2};
  const std::vector<double> scores{0.1, 5, -3};
  for (const TrainConfig& cfg : {TrainConfig{}, unweighted()}) {
    LambdaGradients g = compute_lambdas(labels, scores, cfg);
    for (double v : g.lambdas) EXPECT_EQ(v, 0.0);
    for (double v : g.hessians) EXPECT_EQ(v, 0.0);
  }
}

TEST(ComputeLambdasTest, LengthMismatch) {
  const std::vector<int> labels{1, 0};
  const std::vector<double> scores{0.0};
  EXPECT_THROW(compute_lambdas(labels, scores, TrainConfig{}), ValidationError);
}

TEST(ComputeLambdasTest, ZeroSumAndFiniteDifferences) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> labels(5);
    std::vector<double> scores(5);
    for (int i = 0; i < 5; ++i) {
      labels[i] = static_cast<int>(rng.uniform_index(3));
      scores[i] = rng.normal() * 2.0;
    }
    TrainConfig cfg = unweighted();
    cfg.sigma = 0.5 + rng.uniform() * 2.0;
    LambdaGradients g = compute_lambdas(labels, scores, cfg);
    EXPECT_NEAR(std::accumulate(g.lambdas.begin(), g.lambdas.end(), 0.0), 0.0, 1e-9 * 5);
    const double h = 1e-5;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> up = scores, down = scores;
      up[i] += h;
      down[i] -= h;
      const double numeric = -(pairwise_logistic_cost(labels, up, cfg.sigma) -
                               pairwise_logistic_cost(labels, down, cfg.sigma)) /
                             (2 * h);
      EXPECT_NEAR(g.lambdas[i], numeric, 1e-4);
    }
    LambdaGradients w = compute_lambdas(labels, scores, TrainConfig{});
    EXPECT_NEAR(std::accumulate(w.lambdas.begin(), w.lambdas.end(), 0.0), 0.0, 1e-9 * 5);
    for (double v : w.hessians) EXPECT_GE(v, 0.0);
  }
}

TEST(RankTest, ScoresToPermutation) {
  const std::vector<double> s{0.1, 0.9, 0.5};
  EXPECT_EQ(rank_by_scores(s), (std::vector<std::size_t>{2, 3, 1}));
  const std::vector<double> ties{1, 1, 2, 1};
  EXPECT_EQ(rank_by_scores(ties), (std::vector<std::size_t>{3, 1, 2, 4}));
}

TEST(RankTest, BijectionAndScaleInvariance) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(1 + rng.uniform_index(30));
    for (auto& v : s) v = static_cast<double>(rng.uniform_index(5)) + rng.normal() * (t % 2);
    auto perm = rank_by_scores(s);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i + 1);
    const double c = 0.25 + rng.uniform() * 8.0;
    std::vector<double> scaled = s;
    for (auto& v : scaled) v *= c;
    EXPECT_EQ(rank_by_scores(scaled), perm);
  }
}

TEST(TrainTest, ZeroTreesFallsBackToImpressionOrder) {
  Dataset d = testing::monotone_dataset(20, 6, 1);
  TrainConfig cfg;
  cfg.n_trees = 0;
  LambdaMartModel model = train(d, cfg);
  for (const auto& s : d.sessions) {
    for (double v : model.score_session(s)) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(predict_and_rank(model, s), (std::vector<std::size_t>{1, 2, 3, 4, 5, 6}));
  }
}

TEST(TrainTest, FeatureEqualToLabelSeparatesSales) {
  Rng rng(2);
  Dataset d{FeatureSchema({{"x", FeatureKind::kNumeric, 0, false}, {"noise", FeatureKind::kNumeric, 0, false}}),
            {}, SplitTag::kTrain};
  for (int q = 0; q < 200; ++q) {
    QuerySession s{"q" + std::to_string(q), {}};
    const std::size_t n = 2 + rng.uniform_index(8);
    const std::size_t sale = rng.uniform_index(n);
    for (std::size_t i = 0; i < n; ++i) {
      Item it;
      it.item_id = std::to_string(i);
      it.label = i == sale ? 1 : 0;
      it.numeric["x"] = it.label;
      it.numeric["noise"] = rng.normal();
      s.items.push_back(it);
    }
    d.sessions.push_back(s);
  }
  TrainConfig cfg;
  cfg.n_trees = 30;
  LambdaMartModel model = train(d, cfg);
  for (const auto& s : d.sessions) {
    auto scores = model.score_session(s);
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      for (std::size_t j = 0; j < s.items.size(); ++j) {
        if (s.items[i].label == 1 && s.items[j].label == 0) EXPECT_GT(scores[i], scores[j]);
      }
    }
  }
  EXPECT_GT(model.feature_importance()[0], model.feature_importance()[1]);
}

TEST(TrainTest, MonotoneObjectiveUnweighted) {
  Dataset d = testing::monotone_dataset(300, 10, 5);
  for (double lr : {0.1, 0.05}) {
    TrainConfig cfg = unweighted();
    cfg.n_trees = 40;
    cfg.learning_rate = lr;
    TrainTrace trace;
    train(d, cfg, &trace);
    ASSERT_EQ(trace.objective.size(), 41u);
    for (std::size_t t = 1; t < trace.objective.size(); ++t) {
      EXPECT_LE(trace.objective[t], trace.objective[t - 1]) << "round " << t;
    }
    EXPECT_LT(trace.objective.back(), 0.5 * trace.objective.front());
  }
}

TEST(TrainTest, DeterministicSerialization) {
  Dataset d = testing::monotone_dataset(100, 8, 6);
  TrainConfig cfg;
  cfg.n_trees = 15;
  const LambdaMartModel a = train(d, cfg);
  const LambdaMartModel b = train(d, cfg);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_FALSE(a.fingerprint().empty());
  Dataset other = testing::monotone_dataset(100, 8, 7);
  EXPECT_NE(train(other, cfg).fingerprint(), a.fingerprint());
}

TEST(TrainTest, ModelJsonRoundTrip) {
  Dataset d = testing::monotone_dataset(80, 8, 8);
  TrainConfig cfg;
  cfg.n_trees = 10;
  cfg.max_leaves = 7;
  LambdaMartModel model = train(d, cfg);
  model.tags()["run_id"] = "abc";
  testing::TempDir dir;
  save_model(model, dir / "m.json");
  LambdaMartModel back = load_model(dir / "m.json");
  EXPECT_EQ(back.serialize(), model.serialize());
  EXPECT_EQ(back.config(), cfg);
  EXPECT_EQ(back.tags().at("run_id"), "abc");
  for (const auto& s : d.sessions) EXPECT_EQ(back.score_session(s), model.score_session(s));

  write_text_file(dir / "bad.json", "{\"format\":\"other\"}");
  EXPECT_THROW(load_model(dir / "bad.json"), ValidationError);
  write_text_file(dir / "junk.json", "not json");
  EXPECT_THROW(load_model(dir / "junk.json"), ValidationError);
}

TEST(TrainTest, ScoreIsSumOfShrunkTrees) {
  Dataset d = testing::monotone_dataset(60, 5, 9);
  TrainConfig cfg;
  cfg.n_trees = 8;
  cfg.learning_rate = 0.3;
  LambdaMartModel model = train(d, cfg);
  for (const auto& s : d.sessions) {
    for (const auto& item : s.items) {
      const std::vector<double> row{*item.numeric.at("utility")};
      double want = 0.0;
      for (const auto& t : model.trees()) want += 0.3 * t.predict(row);
      EXPECT_DOUBLE_EQ(model.score(item), want);
      EXPECT_DOUBLE_EQ(model.score(row), want);
    }
  }
  // Unknown or missing features score as 0.
  Item blank;
  blank.numeric["utility"] = std::nullopt;
  const std::vector<double> zero{0.0};
  EXPECT_DOUBLE_EQ(model.score(blank), model.score(zero));
}

TEST(TrainTest, Errors) {
  Dataset d = testing::monotone_dataset(10, 4, 1);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(train(d, bad), ValidationError);
  bad = TrainConfig{};
  bad.max_leaves = 1;
  EXPECT_THROW(train(d, bad), ValidationError);

  Dataset flat = d;
  for (auto& s : flat.sessions) {
    for (auto& it : s.items) it.label = 0;
  }
  EXPECT_THROW(train(flat, TrainConfig{}), TrainingImpossible);

  Dataset single = d;
  single.sessions[3].items.resize(1);
  EXPECT_THROW(train(single, TrainConfig{}), ValidationError);

  Dataset cat{FeatureSchema({{"c", FeatureKind::kCategorical, 0, true}}), {}, SplitTag::kTrain};
  EXPECT_THROW(train(cat, TrainConfig{}), ValidationError);
}

TEST(TrainConfigTest, JsonAndParsing) {
  TrainConfig cfg;
  cfg.n_trees = 7;
  cfg.lambda_weighting = LambdaWeighting::kUnweightedPairwise;
  cfg.seed = 99;
  EXPECT_EQ(TrainConfig::from_json(cfg.to_json()), cfg);
  EXPECT_EQ(parse_lambda_weighting("ndcg_gain"), LambdaWeighting::kNdcgGain);
  EXPECT_EQ(parse_lambda_weighting("unweighted_pairwise"), LambdaWeighting::kUnweightedPairwise);
  EXPECT_THROW(parse_lambda_weighting("listwise"), ValidationError);
}

}  // namespace
}  // namespace deltarank
