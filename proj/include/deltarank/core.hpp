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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deltarank {

enum class FeatureKind { kNumeric, kCategorical, kVector };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Only meaningful for kVector.
  std::size_t dim = 0;
  // Member of the candidate set that delta features are generated from.
  bool delta_candidate = false;

  bool operator==(const FeatureSpec&) const = default;
};

// Ordered list of typed features. Construction validates the invariants
// (non-empty, unique names, vector dim >= 1), so a FeatureSchema value is
// always well formed.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> specs);

  const std::vector<FeatureSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  bool empty() const { return specs_.empty(); }

  // Index of the named feature, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  const FeatureSpec& at(std::string_view name) const;

  bool all_numeric() const;

  // New schema with `extra` appended; re-validates uniqueness.
  FeatureSchema with_appended(const std::vector<FeatureSpec>& extra) const;

  bool operator==(const FeatureSchema& other) const {
    return specs_ == other.specs_;
  }

 private:
  std::vector<FeatureSpec> specs_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// One impressed item. Missing numeric or vector values are represented by
// an empty optional; categorical values are always present.
struct Item {
  std::string item_id;
  int label = 0;
  std::map<std::string, std::optional<double>> numeric;
  std::map<std::string, std::string> categorical;
  std::map<std::string, std::optional<std::vector<double>>> vectors;

  bool operator==(const Item&) const = default;
};

// A query with its items in logged impression order (position k = index+1).
struct QuerySession {
  std::string query_id;
  std::vector<Item> items;

  bool operator==(const QuerySession&) const = default;
};

enum class SplitTag { kUnsplit, kTrain, kTest };

struct Dataset {
  FeatureSchema schema;
  std::vector<QuerySession> sessions;
  SplitTag split_tag = SplitTag::kUnsplit;

  bool operator==(const Dataset&) const = default;
};

std::string_view to_string(FeatureKind kind);
std::string_view to_string(SplitTag tag);

// Throws SchemaError if `item` does not conform to `schema`.
void validate_item(const Item& item, const FeatureSchema& schema);
// Throws ValidationError/SchemaError on empty sessions, duplicate item ids or
// schema violations.
void validate_session(const QuerySession& session, const FeatureSchema& schema);
void validate_dataset(const Dataset& dataset);

}  // namespace deltarank
