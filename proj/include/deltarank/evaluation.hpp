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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deltarank/core.hpp"
#include "deltarank/lambdamart.hpp"

namespace deltarank {

// 1/r for the first position r whose label is >= sale_threshold, 0 if no
// such position. Throws ValidationError on an empty list.
double reciprocal_rank(std::span<const int> labels_in_ranked_order, int sale_threshold = 1);

// NDCG@k with gain 2^label - 1 and discount 1/log2(rank + 1). Lists without
// any positive label score 0.
double ndcg_at_k(std::span<const int> labels_in_ranked_order, std::size_t k);

struct QueryRR {
  std::string query_id;
  double rr = 0.0;

  bool operator==(const QueryRR&) const = default;
};

struct BootstrapInterval {
  int n_resamples = 0;
  double level = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<QueryRR> per_query_rr;
  double mrr = 0.0;
  std::size_t n_queries = 0;
  std::optional<BootstrapInterval> bootstrap;
};

// Report over the given per-query reciprocal ranks (mrr = their mean).
EvalReport make_report(std::vector<QueryRR> per_query_rr);

// Reranks every test session with the model and scores the reordered labels.
EvalReport evaluate(const LambdaMartModel& model, const Dataset& test, int sale_threshold = 1);

// Percentile interval of the resampled mean of `values`; attached to an
// EvalReport as its bootstrap field by the CLI.
BootstrapInterval bootstrap_mean(std::span<const double> values, int n_resamples, double level,
                                 std::uint64_t seed);

// Paired bootstrap of mean(variant) - mean(base). Resample r draws query
// indices with replacement from a stream seeded by (seed, r); the result is
// the [(1-level)/2, 1-(1-level)/2] percentile interval (linear interpolation
// between order statistics).
std::pair<double, double> paired_bootstrap_diff(std::span<const double> base_rr,
                                                std::span<const double> variant_rr,
                                                int n_resamples = 1000, double level = 0.95,
                                                std::uint64_t seed = 0);

// 100 * (variant - base) / base; NaN when base is 0.
double percent_change(double base_mrr, double variant_mrr);

struct ComparisonReport {
  EvalReport base;
  EvalReport variant;
  double mrr_diff = 0.0;
  double percent_change = 0.0;
  std::pair<double, double> diff_ci{0.0, 0.0};
  bool significant = false;  // CI excludes 0
};

// Both reports must cover the same query set; the variant is aligned to the
// base's query order before resampling.
ComparisonReport compare(const EvalReport& base, const EvalReport& variant, int n_resamples,
                         double level, std::uint64_t seed);

}  // namespace deltarank
