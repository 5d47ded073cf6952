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

#include "deltarank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "deltarank/errors.hpp"
#include "deltarank/rng.hpp"

namespace deltarank {

double reciprocal_rank(std::span<const int> labels_in_ranked_order, int sale_threshold) {
  if (labels_in_ranked_order.empty()) throw ValidationError("reciprocal_rank of an empty list");
  for (std::size_t r = 0; r < labels_in_ranked_order.size(); ++r) {
    if (labels_in_ranked_order[r] >= sale_threshold) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double ndcg_at_k(std::span<const int> labels_in_ranked_order, std::size_t k) {
  if (labels_in_ranked_order.empty()) throw ValidationError("ndcg_at_k of an empty list");
  if (k < 1) throw ValidationError("ndcg_at_k needs k >= 1");
  auto dcg = [k](std::span<const int> labels) {
    double total = 0.0;
    const std::size_t cut = std::min(k, labels.size());
    for (std::size_t r = 0; r < cut; ++r) {
      total += (std::exp2(static_cast<double>(labels[r])) - 1.0) /
               std::log2(static_cast<double>(r) + 2.0);
    }
    return total;
  };
  std::vector<int> ideal(labels_in_ranked_order.begin(), labels_in_ranked_order.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double best = dcg(ideal);
  if (best <= 0.0) return 0.0;
  return dcg(labels_in_ranked_order) / best;
}

EvalReport make_report(std::vector<QueryRR> per_query_rr) {
  EvalReport report;
  report.n_queries = per_query_rr.size();
  double sum = 0.0;
  for (const auto& q : per_query_rr) sum += q.rr;
  report.mrr = per_query_rr.empty() ? 0.0 : sum / static_cast<double>(per_query_rr.size());
  report.per_query_rr = std::move(per_query_rr);
  return report;
}

EvalReport evaluate(const LambdaMartModel& model, const Dataset& test, int sale_threshold) {
  if (test.sessions.empty()) throw ValidationError("evaluate needs at least one test session");
  std::vector<QueryRR> rr;
  rr.reserve(test.sessions.size());
  std::vector<int> ranked;
  for (const auto& session : test.sessions) {
    const auto perm = predict_and_rank(model, session);
    ranked.clear();
    for (std::size_t pos : perm) ranked.push_back(session.items[pos - 1].label);
    rr.push_back({session.query_id, reciprocal_rank(ranked, sale_threshold)});
  }
  return make_report(std::move(rr));
}

namespace {

void check_level(double level, int n_resamples) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must be in (0, 1)");
  if (n_resamples < 1) throw ValidationError("n_resamples must be >= 1");
}

// Type-7 sample quantile of sorted values.
double quantile(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> percentile_interval(std::span<const double> values, int n_resamples,
                                              double level, std::uint64_t seed) {
  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(n_resamples));
  for (int r = 0; r < n_resamples; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.uniform_index(n)];
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

}  // namespace

BootstrapInterval bootstrap_mean(std::span<const double> values, int n_resamples, double level,
                                 std::uint64_t seed) {
  check_level(level, n_resamples);
  if (values.empty()) throw ValidationError("bootstrap of an empty sample");
  auto [lo, hi] = percentile_interval(values, n_resamples, level, seed);
  return {n_resamples, level, lo, hi, seed};
}

std::pair<double, double> paired_bootstrap_diff(std::span<const double> base_rr,
                                                std::span<const double> variant_rr,
                                                int n_resamples, double level,
                                                std::uint64_t seed) {
  if (base_rr.size() != variant_rr.size()) {
    throw ValidationError("paired bootstrap needs equal-length inputs");
  }
  if (base_rr.empty()) throw ValidationError("paired bootstrap of an empty sample");
  check_level(level, n_resamples);
  std::vector<double> diffs(base_rr.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = variant_rr[i] - base_rr[i];
  return percentile_interval(diffs, n_resamples, level, seed);
}

double percent_change(double base_mrr, double variant_mrr) {
  if (base_mrr == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (variant_mrr - base_mrr) / base_mrr;
}

ComparisonReport compare(const EvalReport& base, const EvalReport& variant, int n_resamples,
                         double level, std::uint64_t seed) {
  if (base.per_query_rr.size() != variant.per_query_rr.size()) {
    throw ValidationError("compare: reports cover different query sets");
  }
  std::map<std::string, double> variant_by_query;
  for (const auto& q : variant.per_query_rr) variant_by_query[q.query_id] = q.rr;
  if (variant_by_query.size() != variant.per_query_rr.size()) {
    throw ValidationError("compare: duplicate query ids in variant report");
  }
  std::vector<double> b, v;
  b.reserve(base.per_query_rr.size());
  v.reserve(base.per_query_rr.size());
  for (const auto& q : base.per_query_rr) {
    auto it = variant_by_query.find(q.query_id);
    if (it == variant_by_query.end()) {
      throw ValidationError("compare: query '" + q.query_id + "' missing from variant report");
    }
    b.push_back(q.rr);
    v.push_back(it->second);
  }

  ComparisonReport out;
  out.base = base;
  out.variant = variant;
  out.mrr_diff = variant.mrr - base.mrr;
  out.percent_change = percent_change(base.mrr, variant.mrr);
  out.diff_ci = paired_bootstrap_diff(b, v, n_resamples, level, seed);
  out.significant = out.diff_ci.first > 0.0 || out.diff_ci.second < 0.0;
  return out;
}

}  // namespace deltarank
