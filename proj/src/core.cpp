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

#include "deltarank/core.hpp"

#include <cmath>
#include <set>

#include "deltarank/errors.hpp"

namespace deltarank {

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> specs)
    : specs_(std::move(specs)) {
  if (specs_.empty()) throw SchemaError("schema must contain at least one feature");
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const FeatureSpec& spec = specs_[i];
    if (spec.name.empty()) throw SchemaError("feature name must not be empty");
    if (spec.kind == FeatureKind::kVector && spec.dim < 1) {
      throw SchemaError("vector feature '" + spec.name + "' needs dim >= 1");
    }
    if (spec.kind != FeatureKind::kVector && spec.dim != 0) {
      throw SchemaError("feature '" + spec.name + "' is not a vector but has a dim");
    }
    if (!index_.emplace(spec.name, i).second) {
      throw SchemaError("duplicate feature name '" + spec.name + "'");
    }
  }
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const FeatureSpec& FeatureSchema::at(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw SchemaError("unknown feature '" + std::string(name) + "'");
  return specs_[*idx];
}

bool FeatureSchema::all_numeric() const {
  for (const auto& spec : specs_) {
    if (spec.kind != FeatureKind::kNumeric) return false;
  }
  return true;
}

FeatureSchema FeatureSchema::with_appended(
    const std::vector<FeatureSpec>& extra) const {
  std::vector<FeatureSpec> all = specs_;
  all.insert(all.end(), extra.begin(), extra.end());
  return FeatureSchema(std::move(all));
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNumeric: return "numeric";
    case FeatureKind::kCategorical: return "categorical";
    case FeatureKind::kVector: return "vector";
  }
  return "?";
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kUnsplit: return "unsplit";
    case SplitTag::kTrain: return "train";
    case SplitTag::kTest: return "test";
  }
  return "?";
}

void validate_item(const Item& item, const FeatureSchema& schema) {
  const std::string where = "item '" + item.item_id + "'";
  if (item.item_id.empty()) throw SchemaError("item_id must not be empty");
  if (item.label < 0) throw SchemaError(where + ": label must be non-negative");

  std::size_t n_numeric = 0, n_categorical = 0, n_vector = 0;
  for (const auto& spec : schema.specs()) {
    switch (spec.kind) {
      case FeatureKind::kNumeric: {
        auto it = item.numeric.find(spec.name);
        if (it == item.numeric.end()) {
          throw SchemaError(where + ": numeric feature '" + spec.name + "' absent");
        }
        if (it->second && !std::isfinite(*it->second)) {
          throw SchemaError(where + ": numeric feature '" + spec.name + "' not finite");
        }
        ++n_numeric;
        break;
      }
      case FeatureKind::kCategorical: {
        if (!item.categorical.contains(spec.name)) {
          throw SchemaError(where + ": categorical feature '" + spec.name +
                            "' absent (categorical values may not be missing)");
        }
        ++n_categorical;
        break;
      }
      case FeatureKind::kVector: {
        auto it = item.vectors.find(spec.name);
        if (it == item.vectors.end()) {
          throw SchemaError(where + ": vector feature '" + spec.name + "' absent");
        }
        if (it->second) {
          if (it->second->size() != spec.dim) {
            throw SchemaError(where + ": vector feature '" + spec.name + "' has length " +
                              std::to_string(it->second->size()) + ", schema dim " +
                              std::to_string(spec.dim));
          }
          for (double v : *it->second) {
            if (!std::isfinite(v)) {
              throw SchemaError(where + ": vector feature '" + spec.name + "' not finite");
            }
          }
        }
        ++n_vector;
        break;
      }
    }
  }
  // Anything left over is a feature the schema does not know about.
  auto unknown = [&](const auto& map, std::size_t expected, FeatureKind kind) {
    if (map.size() == expected) return;
    for (const auto& [name, value] : map) {
      auto idx = schema.find(name);
      if (!idx || schema.specs()[*idx].kind != kind) {
        throw SchemaError(where + ": unknown " + std::string(to_string(kind)) +
                          " feature '" + name + "'");
      }
    }
  };
  unknown(item.numeric, n_numeric, FeatureKind::kNumeric);
  unknown(item.categorical, n_categorical, FeatureKind::kCategorical);
  unknown(item.vectors, n_vector, FeatureKind::kVector);
}

void validate_session(const QuerySession& session, const FeatureSchema& schema) {
  if (session.query_id.empty()) throw ValidationError("query_id must not be empty");
  if (session.items.empty()) {
    throw ValidationError("session '" + session.query_id + "' has no items");
  }
  std::set<std::string_view> seen;
  for (const Item& item : session.items) {
    if (!seen.insert(item.item_id).second) {
      throw DuplicateItemError("session '" + session.query_id + "': duplicate item_id '" +
                            item.item_id + "'");
    }
    validate_item(item, schema);
  }
}

void validate_dataset(const Dataset& dataset) {
  if (dataset.schema.empty()) throw SchemaError("dataset has an empty schema");
  for (const auto& session : dataset.sessions) {
    validate_session(session, dataset.schema);
  }
}

}  // namespace deltarank
