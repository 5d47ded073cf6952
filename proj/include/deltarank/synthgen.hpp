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
#include <string>
#include <vector>

#include "json.hpp"

#include "deltarank/core.hpp"
#include "deltarank/rng.hpp"

namespace deltarank {

// Synthetic marketplace sessions with a tunable neighborhood-contrast effect
// on which item sells.
//
// Per item: numeric features (price ~ lognormal(3, 0.5), the rest unit
// normal), categorical features with uniform symbols and alphabet sizes
// cycling 2..5, and optionally a unit-norm gaussian embedding. The observable
// score is s_i = w . x_i with the fixed weights in synth_weights(); the true
// utility is u_i = s_i + eps_i, eps_i ~ N(0, noise_sigma^2).
//
// The logged impression order sorts by s_i + eta_i, eta_i ~
// N(0, impression_sigma^2): an imperfect production ranker that only sees
// observable features. Each item's contrast is u_i minus the mean utility
// of the items within contrast_window positions of it, and exactly one item
// is sold with probability proportional to exp(u_i + beta * contrast_i).
struct SynthConfig {
  int n_queries = 2000;
  int items_per_query = 20;
  int n_numeric = 6;
  int n_categorical = 2;
  int vector_dim = 0;
  double effect_strength = 1.0;  // beta
  int contrast_window = 3;
  double noise_sigma = 0.5;
  double impression_sigma = 4.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
  std::string fingerprint() const;
};

// Fixed utility weights, exposed so tests can recompute utilities.
struct SynthWeights {
  std::vector<double> numeric;                   // per numeric feature
  std::vector<std::vector<double>> categorical;  // per feature, per symbol index
  double vector_first_component = 1.5;
};
SynthWeights synth_weights(const SynthConfig& cfg);

FeatureSchema synth_schema(const SynthConfig& cfg);
std::vector<std::string> categorical_alphabet(int feature_index);

// A generated session plus the latent quantities behind its sale, indexed by
// impression position.
struct SessionDraw {
  QuerySession session;
  std::vector<double> utility;
  std::vector<double> contrast;
  std::vector<double> sale_probability;
};

SessionDraw generate_session_draw(const SynthConfig& cfg, Rng& rng, const std::string& query_id);
QuerySession generate_session(const SynthConfig& cfg, Rng& rng, const std::string& query_id);

// Session q uses an Rng seeded with derive_seed(cfg.seed, q) and query id
// "q<q>", so sessions are independent of each other and of generation order.
Dataset generate_dataset(const SynthConfig& cfg);
std::vector<SessionDraw> generate_draws(const SynthConfig& cfg);

}  // namespace deltarank
