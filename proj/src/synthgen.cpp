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

#include "deltarank/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deltarank/errors.hpp"
#include "deltarank/io.hpp"

namespace deltarank {

using nlohmann::json;

namespace {

constexpr double kLogPriceMean = 3.0;
constexpr double kLogPriceSd = 0.5;

const std::vector<std::string> kNumericNames = {"price",        "popularity",  "seller_rating",
                                                "shipping_days", "return_rate", "listing_quality"};
const std::vector<double> kNumericWeights = {-2.4, 1.8, 1.2, -0.9, -0.6, 0.3};
constexpr double kExtraNumericWeight = 0.15;

std::string numeric_name(int f) {
  return f < static_cast<int>(kNumericNames.size()) ? kNumericNames[f] : "num" + std::to_string(f);
}

std::string categorical_name(int c) {
  if (c == 0) return "condition";
  if (c == 1) return "seller_tier";
  return "cat" + std::to_string(c);
}

}  // namespace

std::vector<std::string> categorical_alphabet(int feature_index) {
  if (feature_index == 0) return {"new", "used"};
  if (feature_index == 1) return {"top", "plus", "standard"};
  const int size = 2 + feature_index % 4;
  std::vector<std::string> symbols;
  for (int a = 0; a < size; ++a) symbols.push_back(std::string(1, static_cast<char>('a' + a)));
  return symbols;
}

void SynthConfig::validate() const {
  if (n_queries < 1) throw ValidationError("n_queries must be >= 1");
  if (items_per_query < 2) throw ValidationError("items_per_query must be >= 2");
  if (n_numeric < 0 || n_categorical < 0 || vector_dim < 0) {
    throw ValidationError("feature counts must be non-negative");
  }
  if (n_numeric + n_categorical + (vector_dim > 0 ? 1 : 0) == 0) {
    throw ValidationError("synthetic config generates no features");
  }
  if (!(effect_strength >= 0.0)) throw ValidationError("effect_strength must be >= 0");
  if (contrast_window < 1) throw ValidationError("contrast_window must be >= 1");
  if (!(noise_sigma > 0.0)) throw ValidationError("noise_sigma must be > 0");
  if (!(impression_sigma >= 0.0)) throw ValidationError("impression_sigma must be >= 0");
}

json SynthConfig::to_json() const {
  return {{"n_queries", n_queries},
          {"items_per_query", items_per_query},
          {"n_numeric", n_numeric},
          {"n_categorical", n_categorical},
          {"vector_dim", vector_dim},
          {"effect_strength", effect_strength},
          {"contrast_window", contrast_window},
          {"noise_sigma", noise_sigma},
          {"impression_sigma", impression_sigma},
          {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const json& j) {
  SynthConfig cfg;
  cfg.n_queries = j.value("n_queries", cfg.n_queries);
  cfg.items_per_query = j.value("items_per_query", cfg.items_per_query);
  cfg.n_numeric = j.value("n_numeric", cfg.n_numeric);
  cfg.n_categorical = j.value("n_categorical", cfg.n_categorical);
  cfg.vector_dim = j.value("vector_dim", cfg.vector_dim);
  cfg.effect_strength = j.value("effect_strength", cfg.effect_strength);
  cfg.contrast_window = j.value("contrast_window", cfg.contrast_window);
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.impression_sigma = j.value("impression_sigma", cfg.impression_sigma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

std::string SynthConfig::fingerprint() const {
  Fingerprint fp;
  fp.add(to_json().dump());
  return fp.hex();
}

SynthWeights synth_weights(const SynthConfig& cfg) {
  SynthWeights w;
  for (int f = 0; f < cfg.n_numeric; ++f) {
    w.numeric.push_back(f < static_cast<int>(kNumericWeights.size()) ? kNumericWeights[f]
                                                                     : kExtraNumericWeight);
  }
  for (int c = 0; c < cfg.n_categorical; ++c) {
    const auto size = static_cast<int>(categorical_alphabet(c).size());
    const double half = (size - 1) / 2.0;
    std::vector<double> per_symbol;
    for (int a = 0; a < size; ++a) per_symbol.push_back(0.9 * (half - a) / half);
    w.categorical.push_back(std::move(per_symbol));
  }
  return w;
}

FeatureSchema synth_schema(const SynthConfig& cfg) {
  std::vector<FeatureSpec> specs;
  for (int f = 0; f < cfg.n_numeric; ++f) {
    specs.push_back({numeric_name(f), FeatureKind::kNumeric, 0, true});
  }
  for (int c = 0; c < cfg.n_categorical; ++c) {
    specs.push_back({categorical_name(c), FeatureKind::kCategorical, 0, true});
  }
  if (cfg.vector_dim > 0) {
    specs.push_back(
        {"embedding", FeatureKind::kVector, static_cast<std::size_t>(cfg.vector_dim), true});
  }
  return FeatureSchema(std::move(specs));
}

SessionDraw generate_session_draw(const SynthConfig& cfg, Rng& rng, const std::string& query_id) {
  const auto n = static_cast<std::size_t>(cfg.items_per_query);
  const SynthWeights weights = synth_weights(cfg);

  std::vector<Item> items(n);
  std::vector<double> observable(n, 0.0), utility(n), impression_key(n);
  for (std::size_t i = 0; i < n; ++i) {
    Item& item = items[i];
    item.item_id = "i" + std::to_string(i);
    for (int f = 0; f < cfg.n_numeric; ++f) {
      const double z = rng.normal();
      const double value = f == 0 ? std::exp(kLogPriceMean + kLogPriceSd * z) : z;
      item.numeric[numeric_name(f)] = value;
      observable[i] += weights.numeric[f] * z;
    }
    for (int c = 0; c < cfg.n_categorical; ++c) {
      const auto alphabet = categorical_alphabet(c);
      const auto a = static_cast<std::size_t>(rng.uniform_index(alphabet.size()));
      item.categorical[categorical_name(c)] = alphabet[a];
      observable[i] += weights.categorical[c][a];
    }
    if (cfg.vector_dim > 0) {
      std::vector<double> v(static_cast<std::size_t>(cfg.vector_dim));
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& x : v) {
          x = rng.normal();
          norm += x * x;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
      observable[i] += weights.vector_first_component * v[0];
      item.vectors["embedding"] = std::move(v);
    }
    utility[i] = observable[i] + rng.normal(0.0, cfg.noise_sigma);
    impression_key[i] = observable[i] + rng.normal(0.0, cfg.impression_sigma);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return impression_key[a] > impression_key[b];
  });

  SessionDraw draw;
  draw.session.query_id = query_id;
  draw.session.items.reserve(n);
  for (std::size_t i : order) {
    draw.session.items.push_back(std::move(items[i]));
    draw.utility.push_back(utility[i]);
  }

  const auto w = static_cast<std::size_t>(cfg.contrast_window);
  draw.contrast.resize(n);
  std::vector<double> logits(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= w ? k - w : 0;
    const std::size_t hi = std::min(n - 1, k + w);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == k) continue;
      sum += draw.utility[j];
      ++count;
    }
    draw.contrast[k] = draw.utility[k] - sum / static_cast<double>(count);
    logits[k] = draw.utility[k] + cfg.effect_strength * draw.contrast[k];
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  draw.sale_probability.resize(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    draw.sale_probability[k] = std::exp(logits[k] - peak);
    total += draw.sale_probability[k];
  }
  for (double& p : draw.sale_probability) p /= total;
  const std::size_t sold = rng.categorical(draw.sale_probability);
  for (std::size_t k = 0; k < n; ++k) draw.session.items[k].label = k == sold ? 1 : 0;
  return draw;
}

QuerySession generate_session(const SynthConfig& cfg, Rng& rng, const std::string& query_id) {
  return generate_session_draw(cfg, rng, query_id).session;
}

std::vector<SessionDraw> generate_draws(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SessionDraw> draws;
  draws.reserve(static_cast<std::size_t>(cfg.n_queries));
  for (int q = 0; q < cfg.n_queries; ++q) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(q)));
    draws.push_back(generate_session_draw(cfg, rng, "q" + std::to_string(q)));
  }
  return draws;
}

Dataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Dataset dataset{synth_schema(cfg), {}, SplitTag::kUnsplit};
  dataset.sessions.reserve(static_cast<std::size_t>(cfg.n_queries));
  for (int q = 0; q < cfg.n_queries; ++q) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(q)));
    dataset.sessions.push_back(generate_session(cfg, rng, "q" + std::to_string(q)));
  }
  return dataset;
}

}  // namespace deltarank
