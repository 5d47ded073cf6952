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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "deltarank/delta.hpp"
#include "deltarank/evaluation.hpp"
#include "deltarank/lambdamart.hpp"
#include "deltarank/synthgen.hpp"

namespace deltarank {

// Base model versus one delta-augmented model per (size x direction), all
// trained with the same TrainConfig on the same split.
struct ExperimentPlan {
  std::vector<int> sizes{1, 3, 5};
  std::vector<Direction> directions{Direction::kPrev, Direction::kNext, Direction::kBoth};
  DecayFunction decay;
  BoundaryPolicy boundary = BoundaryPolicy::kRenormalize;
  TrainConfig train;

  // Exactly one data source: a synthetic config or a sessions + schema pair.
  std::optional<SynthConfig> synth;
  std::filesystem::path input_sessions;
  std::filesystem::path input_schema;

  std::filesystem::path out_dir;  // empty: run in memory only
  std::uint64_t seed = 0;         // split and bootstrap
  double train_fraction = 0.8;
  int n_resamples = 1000;
  double level = 0.95;
  int sale_threshold = 1;
  int workers = 1;  // never affects results

  void validate() const;
  // Everything that determines the results (no out_dir, no workers).
  nlohmann::json to_json() const;
  std::string run_id() const;
};

// "Model_Base", "Model_Prev_W3", "Model_Next_W1", "Model_Prev_Next_W5".
std::string model_name(int m, Direction dir);
inline constexpr const char* kBaseModelName = "Model_Base";

// One results.csv row.
struct ResultRow {
  std::string model_name;
  int m = 0;
  std::string direction;  // prev | next | prev_next
  double mrr = 0.0;
  double mrr_diff = 0.0;
  double pct_change = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n_queries = 0;
  std::uint64_t seed = 0;
  std::string run_id;

  bool operator==(const ResultRow&) const = default;
};

struct CellResult {
  std::string model_name;
  int m = 0;
  Direction direction = Direction::kBoth;
  LambdaMartModel model;
  ComparisonReport comparison;
};

struct ExperimentResult {
  std::string run_id;
  LambdaMartModel base_model;
  EvalReport base;
  std::vector<CellResult> cells;  // sizes-major, then directions, as planned
  std::vector<ResultRow> rows;
};

// Runs the whole matrix. When plan.out_dir is set, writes
//   models/<model>.json, results.csv, table.csv, <direction>.svg, manifest.json
// If a cell fails, completed rows are still written along with a manifest
// whose status is "failed", and the error is rethrown.
ExperimentResult run_experiment_matrix(const ExperimentPlan& plan);

ResultRow make_row(const CellResult& cell, const ExperimentPlan& plan, const std::string& run_id);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);

// Percent-change grid: one row per m, columns prev/next/prev_next (those
// present), two decimals.
std::string table_csv(const std::vector<ResultRow>& rows);

// Bar chart of mrr_diff per m with ci_lo/ci_hi error bars for the rows of one
// direction label. Numeric attributes carry the exact CSV strings.
std::string svg_chart(const std::vector<ResultRow>& rows, const std::string& direction);

// results.csv, table.csv and one <direction>.svg per direction present.
// Returns the written paths, relative to out_dir.
std::vector<std::string> emit_report(const std::vector<ResultRow>& rows,
                                     const std::filesystem::path& out_dir);

}  // namespace deltarank
