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

#include "deltarank/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "deltarank/dataset_ops.hpp"
#include "deltarank/errors.hpp"
#include "deltarank/io.hpp"
#include "deltarank/rng.hpp"

namespace deltarank {

using nlohmann::json;

void ExperimentPlan::validate() const {
  if (sizes.empty()) throw ValidationError("experiment needs at least one neighborhood size");
  if (directions.empty()) throw ValidationError("experiment needs at least one direction");
  for (int m : sizes) {
    if (m < 1) throw ValidationError("neighborhood sizes must be >= 1");
  }
  if (std::set<int>(sizes.begin(), sizes.end()).size() != sizes.size()) {
    throw ValidationError("duplicate neighborhood size");
  }
  if (std::set<Direction>(directions.begin(), directions.end()).size() != directions.size()) {
    throw ValidationError("duplicate direction");
  }
  decay.validate();
  train.validate();
  const bool has_input = !input_sessions.empty() || !input_schema.empty();
  if (synth.has_value() == has_input) {
    throw ValidationError("experiment needs either a synthetic config or an input dataset");
  }
  if (has_input && (input_sessions.empty() || input_schema.empty())) {
    throw ValidationError("input dataset needs both sessions and schema paths");
  }
  if (synth) synth->validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must be in (0, 1)");
  }
  if (n_resamples < 1) throw ValidationError("n_resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must be in (0, 1)");
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

json ExperimentPlan::to_json() const {
  json dirs = json::array();
  for (Direction d : directions) dirs.push_back(std::string(to_string(d)));
  json j{{"sizes", sizes},
         {"directions", dirs},
         {"decay", to_string(decay)},
         {"boundary", std::string(to_string(boundary))},
         {"train", train.to_json()},
         {"seed", seed},
         {"train_fraction", train_fraction},
         {"n_resamples", n_resamples},
         {"level", level},
         {"sale_threshold", sale_threshold}};
  if (synth) {
    j["synth"] = synth->to_json();
  } else {
    j["input_sessions"] = input_sessions.string();
    j["input_schema"] = input_schema.string();
  }
  return j;
}

std::string ExperimentPlan::run_id() const {
  Fingerprint fp;
  fp.add(to_json().dump());
  return fp.hex();
}

std::string model_name(int m, Direction dir) {
  switch (dir) {
    case Direction::kPrev: return "Model_Prev_W" + std::to_string(m);
    case Direction::kNext: return "Model_Next_W" + std::to_string(m);
    case Direction::kBoth: return "Model_Prev_Next_W" + std::to_string(m);
  }
  return "?";
}

ResultRow make_row(const CellResult& cell, const ExperimentPlan& plan, const std::string& run_id) {
  const ComparisonReport& c = cell.comparison;
  return ResultRow{cell.model_name,
                   cell.m,
                   std::string(direction_label(cell.direction)),
                   c.variant.mrr,
                   c.mrr_diff,
                   c.percent_change,
                   c.diff_ci.first,
                   c.diff_ci.second,
                   c.variant.n_queries,
                   plan.seed,
                   run_id};
}

namespace {

struct PreparedData {
  Dataset train_raw;
  Dataset test_raw;
  CategoricalVocabulary vocabulary;
};

PreparedData prepare(const ExperimentPlan& plan) {
  Dataset all = plan.synth ? generate_dataset(*plan.synth)
                           : parse_sessions(plan.input_sessions, read_schema(plan.input_schema));
  auto [train_raw, test_raw] = split_dataset(all, plan.train_fraction, plan.seed);
  CategoricalVocabulary vocab = build_vocabulary(train_raw);
  return {std::move(train_raw), std::move(test_raw), std::move(vocab)};
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Every index is
// attempted; the first exception (by index) is returned.
template <typename Fn>
std::vector<std::exception_ptr> run_parallel(std::size_t n, int workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return errors;
}

std::string error_message(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

ExperimentResult run_experiment_matrix(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentResult result;
  result.run_id = plan.run_id();
  const bool write = !plan.out_dir.empty();

  json manifest{{"run_id", result.run_id}, {"plan", plan.to_json()}, {"status", "running"}};
  if (plan.synth) manifest["synth_fingerprint"] = plan.synth->fingerprint();
  json models = json::array();
  auto write_manifest = [&] {
    if (!write) return;
    manifest["models"] = models;
    write_text_file(plan.out_dir / "manifest.json", manifest.dump(2) + "\n");
  };

  struct Cell {
    int m;
    Direction dir;
  };
  std::vector<Cell> cells;
  for (int m : plan.sizes) {
    for (Direction dir : plan.directions) cells.push_back({m, dir});
  }
  result.cells.resize(cells.size());

  try {
    const PreparedData data = prepare(plan);
    manifest["n_train_sessions"] = data.train_raw.sessions.size();
    manifest["n_test_sessions"] = data.test_raw.sessions.size();

    auto save = [&](LambdaMartModel& model, const std::string& name) {
      model.tags()["run_id"] = result.run_id;
      model.tags()["model_name"] = name;
      if (write) save_model(model, plan.out_dir / "models" / (name + ".json"));
    };

    result.base_model = train(to_numeric(data.train_raw, data.vocabulary), plan.train);
    save(result.base_model, kBaseModelName);
    result.base = evaluate(result.base_model, to_numeric(data.test_raw, data.vocabulary),
                           plan.sale_threshold);
    models.push_back({{"name", kBaseModelName},
                      {"path", "models/" + std::string(kBaseModelName) + ".json"},
                      {"fingerprint", result.base_model.fingerprint()},
                      {"mrr", result.base.mrr}});

    auto errors = run_parallel(cells.size(), plan.workers, [&](std::size_t i) {
      DeltaConfig dcfg{cells[i].m, cells[i].dir, plan.decay, plan.boundary};
      CellResult& cell = result.cells[i];
      cell.model_name = model_name(cells[i].m, cells[i].dir);
      cell.m = cells[i].m;
      cell.direction = cells[i].dir;
      cell.model = train(to_numeric(augment_dataset(data.train_raw, dcfg), data.vocabulary),
                         plan.train);
      save(cell.model, cell.model_name);
      EvalReport variant = evaluate(
          cell.model, to_numeric(augment_dataset(data.test_raw, dcfg), data.vocabulary),
          plan.sale_threshold);
      cell.comparison = compare(result.base, variant, plan.n_resamples, plan.level, plan.seed);
    });

    std::exception_ptr first_error;
    json failures = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (errors[i]) {
        if (!first_error) first_error = errors[i];
        failures.push_back({{"model", model_name(cells[i].m, cells[i].dir)},
                            {"error", error_message(errors[i])}});
        continue;
      }
      result.rows.push_back(make_row(result.cells[i], plan, result.run_id));
      models.push_back({{"name", result.cells[i].model_name},
                        {"path", "models/" + result.cells[i].model_name + ".json"},
                        {"fingerprint", result.cells[i].model.fingerprint()},
                        {"mrr", result.cells[i].comparison.variant.mrr}});
    }
    if (write && !result.rows.empty()) manifest["outputs"] = emit_report(result.rows, plan.out_dir);
    if (first_error) {
      manifest["status"] = "failed";
      manifest["failures"] = failures;
      write_manifest();
      std::rethrow_exception(first_error);
    }
  } catch (...) {
    if (manifest["status"] == "running") {
      manifest["status"] = "failed";
      manifest["failures"] = json::array({{{"error", error_message(std::current_exception())}}});
      write_manifest();
    }
    throw;
  }
  manifest["status"] = "ok";
  write_manifest();
  return result;
}

}  // namespace deltarank
