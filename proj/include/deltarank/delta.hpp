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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deltarank/core.hpp"

namespace deltarank {

enum class Direction { kPrev, kNext, kBoth };

// How a window that runs past the start or end of the list is averaged.
//   kRenormalize: divide by the number of neighbors that contributed.
//   kFixed:       always divide by m; absent neighbors contribute 0.
enum class BoundaryPolicy { kRenormalize, kFixed };

// Distance weight gamma(j) that divides the contribution of the neighbor j
// positions away (j >= 1).
struct DecayFunction {
  enum class Kind { kConstant, kReciprocal, kExponential };

  Kind kind = Kind::kConstant;
  double alpha = 1.0;  // kExponential only; must be > 0

  static DecayFunction constant() { return {}; }
  static DecayFunction reciprocal() { return {Kind::kReciprocal, 1.0}; }
  static DecayFunction exponential(double alpha) { return {Kind::kExponential, alpha}; }

  // constant: 1; reciprocal: j; exponential: alpha^(j-1).
  double operator()(int j) const;
  void validate() const;

  bool operator==(const DecayFunction&) const = default;
};

struct DeltaConfig {
  int m = 3;
  Direction direction = Direction::kBoth;
  DecayFunction decay;
  BoundaryPolicy boundary = BoundaryPolicy::kRenormalize;

  void validate() const;
};

std::string_view to_string(Direction dir);
// "prev", "next", "prev_next": how result tables label a direction.
std::string_view direction_label(Direction dir);
Direction parse_direction(std::string_view text);
std::string_view to_string(BoundaryPolicy policy);
BoundaryPolicy parse_boundary(std::string_view text);
std::string to_string(const DecayFunction& decay);
// "constant", "reciprocal", "exponential:<alpha>" (or kind plus separate alpha).
DecayFunction parse_decay(std::string_view text, double alpha = 0.5);

// 1 when the symbols are identical (case-sensitive), else 0.
double diff(std::string_view a, std::string_view b);

// 1 - cos(u, v), in [0, 2]. Throws ValidationError on a dimension mismatch
// or a zero-norm argument.
double vdiff(std::span<const double> u, std::span<const double> v);

// Delta value of `feature` for the item at 1-based position k, looking in
// direction dir (kPrev or kNext; kBoth is rejected). Neighbors that fall
// outside the list or whose value is missing are skipped; a missing focal
// value or an empty neighborhood gives 0.
double compute_delta(const QuerySession& session, const FeatureSchema& schema,
                     std::string_view feature, std::size_t k, Direction dir,
                     const DeltaConfig& cfg);

// "delta_<prev|next>_m<m>_<feature>"
std::string delta_column_name(Direction dir, int m, std::string_view feature);

// Columns augment_dataset appends, in order: for each candidate feature in
// schema order, prev then next (as requested by cfg.direction).
std::vector<FeatureSpec> delta_columns(const FeatureSchema& schema, const DeltaConfig& cfg);

// Copy of `dataset` with the delta columns appended to the schema and filled
// in for every item from the session's impression order.
Dataset augment_dataset(const Dataset& dataset, const DeltaConfig& cfg);

}  // namespace deltarank
