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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "deltarank/core.hpp"

namespace deltarank {

// Session-level split. The train part gets round(train_fraction * n)
// sessions, clamped to [1, n-1] so neither side is empty. Membership is a
// seeded shuffle; both parts keep the original relative session order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

// Observed symbols per categorical feature, sorted.
using CategoricalVocabulary = std::map<std::string, std::set<std::string>>;

CategoricalVocabulary build_vocabulary(const Dataset& dataset);

// Recovers the vocabulary behind `c=<symbol>` indicator columns, e.g. from a
// trained model's feature names, so test data gets the training-time view.
CategoricalVocabulary vocabulary_from_columns(const FeatureSchema& schema,
                                              const std::vector<std::string>& columns);

// Numeric view of a dataset for the tree learner:
//   numeric feature x        -> x (missing stays missing)
//   categorical feature c    -> one indicator column "c=<symbol>" per
//                               vocabulary symbol (unknown symbols -> all 0)
//   vector feature v (dim d) -> columns "v[0]" ... "v[d-1]"
// Column order follows the schema, then vocabulary order.
Dataset to_numeric(const Dataset& dataset, const CategoricalVocabulary& vocabulary);

}  // namespace deltarank
