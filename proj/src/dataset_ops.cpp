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

#include "deltarank/dataset_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "deltarank/errors.hpp"
#include "deltarank/rng.hpp"

namespace deltarank {

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  const std::size_t n = dataset.sessions.size();
  if (n < 2) throw ValidationError("split needs at least 2 sessions");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must be in (0, 1)");
  }
  std::size_t n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x73706c6974ULL));
  rng.shuffle(order);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Dataset train{dataset.schema, {}, SplitTag::kTrain};
  Dataset test{dataset.schema, {}, SplitTag::kTest};
  train.sessions.reserve(n_train);
  test.sessions.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : test).sessions.push_back(dataset.sessions[i]);
  }
  return {std::move(train), std::move(test)};
}

CategoricalVocabulary build_vocabulary(const Dataset& dataset) {
  CategoricalVocabulary vocab;
  for (const auto& spec : dataset.schema.specs()) {
    if (spec.kind == FeatureKind::kCategorical) vocab[spec.name];
  }
  for (const auto& session : dataset.sessions) {
    for (const auto& item : session.items) {
      for (const auto& [name, symbol] : item.categorical) vocab[name].insert(symbol);
    }
  }
  return vocab;
}

CategoricalVocabulary vocabulary_from_columns(const FeatureSchema& schema,
                                              const std::vector<std::string>& columns) {
  CategoricalVocabulary vocab;
  for (const auto& spec : schema.specs()) {
    if (spec.kind != FeatureKind::kCategorical) continue;
    auto& symbols = vocab[spec.name];
    const std::string prefix = spec.name + "=";
    for (const auto& column : columns) {
      if (column.size() > prefix.size() && column.compare(0, prefix.size(), prefix) == 0) {
        symbols.insert(column.substr(prefix.size()));
      }
    }
  }
  return vocab;
}

Dataset to_numeric(const Dataset& dataset, const CategoricalVocabulary& vocabulary) {
  std::vector<FeatureSpec> specs;
  for (const auto& spec : dataset.schema.specs()) {
    switch (spec.kind) {
      case FeatureKind::kNumeric:
        specs.push_back(spec);
        break;
      case FeatureKind::kCategorical: {
        auto it = vocabulary.find(spec.name);
        if (it == vocabulary.end()) break;
        for (const auto& symbol : it->second) {
          specs.push_back({spec.name + "=" + symbol, FeatureKind::kNumeric, 0, false});
        }
        break;
      }
      case FeatureKind::kVector:
        for (std::size_t d = 0; d < spec.dim; ++d) {
          specs.push_back(
              {spec.name + "[" + std::to_string(d) + "]", FeatureKind::kNumeric, 0, false});
        }
        break;
    }
  }
  if (specs.empty()) throw SchemaError("numeric view has no columns");

  Dataset out{FeatureSchema(std::move(specs)), {}, dataset.split_tag};
  out.sessions.reserve(dataset.sessions.size());
  for (const auto& session : dataset.sessions) {
    QuerySession s{session.query_id, {}};
    s.items.reserve(session.items.size());
    for (const auto& item : session.items) {
      Item converted{item.item_id, item.label, {}, {}, {}};
      for (const auto& spec : dataset.schema.specs()) {
        switch (spec.kind) {
          case FeatureKind::kNumeric:
            converted.numeric[spec.name] = item.numeric.at(spec.name);
            break;
          case FeatureKind::kCategorical: {
            auto it = vocabulary.find(spec.name);
            if (it == vocabulary.end()) break;
            const std::string& value = item.categorical.at(spec.name);
            for (const auto& symbol : it->second) {
              converted.numeric[spec.name + "=" + symbol] = value == symbol ? 1.0 : 0.0;
            }
            break;
          }
          case FeatureKind::kVector: {
            const auto& v = item.vectors.at(spec.name);
            for (std::size_t d = 0; d < spec.dim; ++d) {
              converted.numeric[spec.name + "[" + std::to_string(d) + "]"] =
                  v ? std::optional<double>((*v)[d]) : std::nullopt;
            }
            break;
          }
        }
      }
      s.items.push_back(std::move(converted));
    }
    out.sessions.push_back(std::move(s));
  }
  return out;
}

}  // namespace deltarank
