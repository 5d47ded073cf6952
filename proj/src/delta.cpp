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

#include "deltarank/delta.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "deltarank/errors.hpp"
#include "deltarank/io.hpp"

namespace deltarank {

double DecayFunction::operator()(int j) const {
  switch (kind) {
    case Kind::kConstant: return 1.0;
    case Kind::kReciprocal: return static_cast<double>(j);
    case Kind::kExponential: return std::pow(alpha, j - 1);
  }
  return 1.0;
}

void DecayFunction::validate() const {
  if (kind == Kind::kExponential && !(alpha > 0.0 && std::isfinite(alpha))) {
    throw ValidationError("exponential decay needs alpha > 0");
  }
}

void DeltaConfig::validate() const {
  if (m < 1) throw ValidationError("neighborhood size m must be >= 1");
  decay.validate();
}

std::string_view to_string(Direction dir) {
  switch (dir) {
    case Direction::kPrev: return "prev";
    case Direction::kNext: return "next";
    case Direction::kBoth: return "both";
  }
  return "?";
}

std::string_view direction_label(Direction dir) {
  return dir == Direction::kBoth ? "prev_next" : to_string(dir);
}

Direction parse_direction(std::string_view text) {
  if (text == "prev") return Direction::kPrev;
  if (text == "next") return Direction::kNext;
  if (text == "both" || text == "prev_next") return Direction::kBoth;
  throw ValidationError("unknown direction '" + std::string(text) + "'");
}

std::string_view to_string(BoundaryPolicy policy) {
  return policy == BoundaryPolicy::kRenormalize ? "renormalize" : "fixed";
}

BoundaryPolicy parse_boundary(std::string_view text) {
  if (text == "renormalize") return BoundaryPolicy::kRenormalize;
  if (text == "fixed") return BoundaryPolicy::kFixed;
  throw ValidationError("unknown boundary policy '" + std::string(text) + "'");
}

std::string to_string(const DecayFunction& decay) {
  switch (decay.kind) {
    case DecayFunction::Kind::kConstant: return "constant";
    case DecayFunction::Kind::kReciprocal: return "reciprocal";
    case DecayFunction::Kind::kExponential: return "exponential:" + format_double(decay.alpha);
  }
  return "?";
}

DecayFunction parse_decay(std::string_view text, double alpha) {
  if (text == "constant") return DecayFunction::constant();
  if (text == "reciprocal") return DecayFunction::reciprocal();
  if (text.starts_with("exponential")) {
    std::string_view rest = text.substr(std::string_view("exponential").size());
    if (!rest.empty()) {
      if (rest.front() != ':') throw ValidationError("bad decay '" + std::string(text) + "'");
      rest.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), alpha);
      if (ec != std::errc() || ptr != rest.data() + rest.size()) {
        throw ValidationError("bad decay alpha in '" + std::string(text) + "'");
      }
    }
    DecayFunction decay = DecayFunction::exponential(alpha);
    decay.validate();
    return decay;
  }
  throw ValidationError("unknown decay '" + std::string(text) + "'");
}

double diff(std::string_view a, std::string_view b) { return a == b ? 1.0 : 0.0; }

double vdiff(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("vdiff dimension mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ValidationError("vdiff of a zero-norm vector is undefined");
  const double cos = std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
  return 1.0 - cos;
}

namespace {

// Contribution of the neighbor at `other` to the delta of the item at
// `focal`; nullopt if either value is missing.
std::optional<double> contrast(const FeatureSpec& spec, const Item& focal, const Item& other) {
  switch (spec.kind) {
    case FeatureKind::kNumeric: {
      const auto& a = focal.numeric.at(spec.name);
      const auto& b = other.numeric.at(spec.name);
      if (!a || !b) return std::nullopt;
      return *b - *a;
    }
    case FeatureKind::kCategorical:
      return diff(other.categorical.at(spec.name), focal.categorical.at(spec.name));
    case FeatureKind::kVector: {
      const auto& a = focal.vectors.at(spec.name);
      const auto& b = other.vectors.at(spec.name);
      if (!a || !b) return std::nullopt;
      return vdiff(*b, *a);
    }
  }
  return std::nullopt;
}

bool focal_missing(const FeatureSpec& spec, const Item& item) {
  switch (spec.kind) {
    case FeatureKind::kNumeric: return !item.numeric.at(spec.name).has_value();
    case FeatureKind::kVector: return !item.vectors.at(spec.name).has_value();
    case FeatureKind::kCategorical: return false;
  }
  return false;
}

double delta_for(const QuerySession& session, const FeatureSpec& spec, std::size_t k,
                 Direction dir, const DeltaConfig& cfg) {
  const std::size_t n = session.items.size();
  const Item& focal = session.items[k - 1];
  if (focal_missing(spec, focal)) return 0.0;
  double sum = 0.0;
  int count = 0;
  for (int j = 1; j <= cfg.m; ++j) {
    std::size_t pos;
    if (dir == Direction::kPrev) {
      if (static_cast<std::size_t>(j) >= k) break;
      pos = k - j;
    } else {
      pos = k + j;
      if (pos > n) break;
    }
    auto term = contrast(spec, focal, session.items[pos - 1]);
    if (!term) continue;
    sum += *term / cfg.decay(j);
    ++count;
  }
  if (count == 0) return 0.0;
  return cfg.boundary == BoundaryPolicy::kRenormalize ? sum / count : sum / cfg.m;
}

}  // namespace

double compute_delta(const QuerySession& session, const FeatureSchema& schema,
                     std::string_view feature, std::size_t k, Direction dir,
                     const DeltaConfig& cfg) {
  cfg.validate();
  if (dir == Direction::kBoth) throw ValidationError("compute_delta needs prev or next");
  const FeatureSpec& spec = schema.at(feature);
  if (!spec.delta_candidate) {
    throw ValidationError("feature '" + spec.name + "' is not a delta candidate");
  }
  if (k < 1 || k > session.items.size()) {
    throw ValidationError("position " + std::to_string(k) + " out of range 1.." +
                          std::to_string(session.items.size()));
  }
  return delta_for(session, spec, k, dir, cfg);
}

std::string delta_column_name(Direction dir, int m, std::string_view feature) {
  return "delta_" + std::string(to_string(dir)) + "_m" + std::to_string(m) + "_" +
         std::string(feature);
}

namespace {

std::vector<Direction> expand(Direction dir) {
  if (dir == Direction::kBoth) return {Direction::kPrev, Direction::kNext};
  return {dir};
}

}  // namespace

std::vector<FeatureSpec> delta_columns(const FeatureSchema& schema, const DeltaConfig& cfg) {
  std::vector<FeatureSpec> columns;
  for (const auto& spec : schema.specs()) {
    if (!spec.delta_candidate) continue;
    for (Direction dir : expand(cfg.direction)) {
      columns.push_back({delta_column_name(dir, cfg.m, spec.name), FeatureKind::kNumeric, 0, false});
    }
  }
  return columns;
}

Dataset augment_dataset(const Dataset& dataset, const DeltaConfig& cfg) {
  cfg.validate();
  std::vector<const FeatureSpec*> candidates;
  for (const auto& spec : dataset.schema.specs()) {
    if (spec.delta_candidate) candidates.push_back(&spec);
  }
  if (candidates.empty()) throw ValidationError("augment needs at least one delta candidate feature");
  const auto directions = expand(cfg.direction);

  Dataset out{dataset.schema.with_appended(delta_columns(dataset.schema, cfg)), dataset.sessions,
              dataset.split_tag};
  for (std::size_t s = 0; s < dataset.sessions.size(); ++s) {
    const QuerySession& session = dataset.sessions[s];
    QuerySession& target = out.sessions[s];
    for (std::size_t k = 1; k <= session.items.size(); ++k) {
      Item& item = target.items[k - 1];
      for (const FeatureSpec* spec : candidates) {
        for (Direction dir : directions) {
          item.numeric[delta_column_name(dir, cfg.m, spec->name)] =
              delta_for(session, *spec, k, dir, cfg);
        }
      }
    }
  }
  return out;
}

}  // namespace deltarank
