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

// deltarank command-line tool.
//
//   deltarank synth      generate synthetic sessions + schema (+ <out>.config.json)
//   deltarank augment    append delta features (optionally export SVMLight)
//   deltarank train      fit a LambdaMART model
//   deltarank eval       score a model, optionally against a baseline
//   deltarank experiment run the base vs delta model matrix
//   deltarank report     rebuild table.csv and charts from results.csv
//
// Every subcommand accepts --config <file.json>: a flat object whose keys are
// long flag names (dashes or underscores). Flags given on the command line
// override the file.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "deltarank/dataset_ops.hpp"
#include "deltarank/delta.hpp"
#include "deltarank/errors.hpp"
#include "deltarank/evaluation.hpp"
#include "deltarank/experiment.hpp"
#include "deltarank/io.hpp"
#include "deltarank/lambdamart.hpp"
#include "deltarank/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace deltarank;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string config_value(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (e.is_array() || e.is_object()) break;
      if (!joined.empty()) joined += ",";
      joined += config_value(key, e);
    }
    return joined;
  }
  throw ValidationError("config key '" + key + "' must be a scalar or a flat list");
}

// argv with the --config file expanded in place of the flag, so that later
// command-line occurrences win under the take-last policy.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 0; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config") {
      if (i + 1 >= argc) throw ValidationError("--config needs a file path");
      path = argv[++i];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      out.push_back(std::move(arg));
      continue;
    }
    json cfg;
    try {
      cfg = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw ValidationError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config " + path + " must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      std::string flag = key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      if (flag == "config") throw ValidationError("config files cannot nest --config");
      if (value.is_null()) continue;
      out.push_back("--" + flag + "=" + config_value(key, value));
    }
  }
  return out;
}

void add_synth_options(CLI::App* cmd, SynthConfig& s, const std::string& seed_flag) {
  cmd->add_option("--n-queries", s.n_queries, "Sessions to generate");
  cmd->add_option("--items-per-query", s.items_per_query, "Items per session");
  cmd->add_option("--n-numeric", s.n_numeric, "Numeric features");
  cmd->add_option("--n-categorical", s.n_categorical, "Categorical features");
  cmd->add_option("--vector-dim", s.vector_dim, "Embedding dimension (0 disables)");
  cmd->add_option("--effect-strength", s.effect_strength, "Neighborhood contrast effect beta");
  cmd->add_option("--contrast-window", s.contrast_window, "Contrast window w");
  cmd->add_option("--noise-sigma", s.noise_sigma, "Utility noise sd");
  cmd->add_option("--impression-sigma", s.impression_sigma, "Production ranker noise sd");
  cmd->add_option(seed_flag, s.seed, "Generator seed");
}

void add_train_options(CLI::App* cmd, TrainConfig& t, std::string& weighting,
                       const std::string& seed_flag) {
  cmd->add_option("--n-trees", t.n_trees, "Boosting rounds");
  cmd->add_option("--learning-rate", t.learning_rate, "Shrinkage");
  cmd->add_option("--max-leaves", t.max_leaves, "Leaves per tree");
  cmd->add_option("--min-samples-leaf", t.min_samples_leaf, "Minimum items per leaf");
  cmd->add_option("--lambda-weighting", weighting, "ndcg_gain | unweighted_pairwise");
  cmd->add_option("--sigma", t.sigma, "Pairwise logistic steepness");
  cmd->add_option(seed_flag, t.seed, "Training seed");
}

struct DeltaFlags {
  std::string decay = "constant";
  double alpha = 0.5;
  std::string boundary = "renormalize";
};

void add_delta_options(CLI::App* cmd, DeltaFlags& d) {
  cmd->add_option("--decay", d.decay, "constant | reciprocal | exponential[:alpha]");
  cmd->add_option("--alpha", d.alpha, "Exponential decay base");
  cmd->add_option("--boundary", d.boundary, "renormalize | fixed");
}

Dataset load_dataset(const fs::path& sessions, const fs::path& schema) {
  return parse_sessions(sessions, read_schema(schema));
}

int cmd_synth(const SynthConfig& cfg, const fs::path& out, const fs::path& schema_out) {
  Dataset data = generate_dataset(cfg);
  write_schema(data.schema, schema_out);
  write_sessions(data, out);
  json provenance{{"synth", cfg.to_json()}, {"fingerprint", cfg.fingerprint()}};
  write_text_file(out.string() + ".config.json", provenance.dump(2) + "\n");
  std::cout << "wrote " << data.sessions.size() << " sessions to " << out.string() << "\n";
  return 0;
}

int cmd_augment(const fs::path& sessions, const fs::path& schema, const fs::path& out,
                const fs::path& schema_out, const DeltaConfig& dcfg, const fs::path& svmlight) {
  Dataset augmented = augment_dataset(load_dataset(sessions, schema), dcfg);
  write_schema(augmented.schema, schema_out);
  write_sessions(augmented, out);
  if (!svmlight.empty()) {
    export_svmlight(to_numeric(augmented, build_vocabulary(augmented)), svmlight);
  }
  std::cout << "wrote " << augmented.schema.size() << " features to " << out.string() << "\n";
  return 0;
}

int cmd_train(const fs::path& sessions, const fs::path& schema, const fs::path& model_out,
              const TrainConfig& cfg) {
  Dataset data = load_dataset(sessions, schema);
  LambdaMartModel model = train(to_numeric(data, build_vocabulary(data)), cfg);
  save_model(model, model_out);
  std::cout << "trained " << model.trees().size() << " trees, fingerprint "
            << model.fingerprint() << "\n";
  return 0;
}

EvalReport evaluate_file(const LambdaMartModel& model, const Dataset& data, int sale_threshold) {
  return evaluate(model,
                  to_numeric(data, vocabulary_from_columns(data.schema, model.feature_names())),
                  sale_threshold);
}

json interval_json(double lo, double hi) { return json{{"lo", lo}, {"hi", hi}}; }

int cmd_eval(const fs::path& model_path, const fs::path& sessions, const fs::path& schema,
             const fs::path& baseline_path, int n_resamples, double level, std::uint64_t seed,
             int sale_threshold, const fs::path& out) {
  Dataset data = load_dataset(sessions, schema);
  LambdaMartModel model = load_model(model_path);
  EvalReport report = evaluate_file(model, data, sale_threshold);
  std::vector<double> rr;
  for (const auto& q : report.per_query_rr) rr.push_back(q.rr);
  report.bootstrap = bootstrap_mean(rr, n_resamples, level, seed);

  json j{{"model", model_path.string()},
         {"mrr", report.mrr},
         {"n_queries", report.n_queries},
         {"bootstrap",
          {{"n_resamples", n_resamples},
           {"level", level},
           {"seed", seed},
           {"lo", report.bootstrap->lo},
           {"hi", report.bootstrap->hi}}}};
  json per_query = json::array();
  for (const auto& q : report.per_query_rr) per_query.push_back({{"query_id", q.query_id}, {"rr", q.rr}});
  j["per_query_rr"] = per_query;

  if (!baseline_path.empty()) {
    EvalReport base = evaluate_file(load_model(baseline_path), data, sale_threshold);
    ComparisonReport c = compare(base, report, n_resamples, level, seed);
    j["comparison"] = {{"baseline", baseline_path.string()},
                       {"baseline_mrr", c.base.mrr},
                       {"mrr_diff", c.mrr_diff},
                       {"percent_change", c.percent_change},
                       {"diff_ci", interval_json(c.diff_ci.first, c.diff_ci.second)},
                       {"significant", c.significant}};
  }
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cout << "mrr " << format_double(report.mrr) << " over " << report.n_queries
              << " queries\n";
  }
  return 0;
}

int cmd_experiment(const ExperimentPlan& plan) {
  ExperimentResult result = run_experiment_matrix(plan);
  std::cout << "run " << result.run_id << ": " << kBaseModelName << " mrr "
            << format_double(result.base.mrr) << "\n";
  std::cout << results_csv(result.rows);
  return 0;
}

int cmd_report(const fs::path& results, const fs::path& out_dir) {
  std::vector<ResultRow> rows = parse_results_csv(read_text_file(results));
  if (rows.empty()) throw ValidationError(results.string() + " has no result rows");
  for (const auto& path : emit_report(rows, out_dir)) std::cout << (out_dir / path).string() << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Delta-feature learning-to-rank experiments"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  int status = 0;

  // synth
  SynthConfig synth_cfg;
  fs::path synth_out, synth_schema_out;
  auto* synth = app.add_subcommand("synth", "Generate synthetic sessions");
  add_synth_options(synth, synth_cfg, "--seed");
  synth->add_option("--out", synth_out, "Sessions JSONL output")->required();
  synth->add_option("--schema-out", synth_schema_out, "Schema JSON output")->required();

  // augment
  fs::path aug_sessions, aug_schema, aug_out, aug_schema_out, aug_svmlight;
  int aug_m = 3;
  std::string aug_direction = "both";
  DeltaFlags aug_delta;
  auto* augment = app.add_subcommand("augment", "Append delta features");
  augment->add_option("--sessions", aug_sessions, "Sessions JSONL")->required();
  augment->add_option("--schema", aug_schema, "Schema JSON")->required();
  augment->add_option("--out", aug_out, "Augmented sessions output")->required();
  augment->add_option("--schema-out", aug_schema_out, "Augmented schema output")->required();
  augment->add_option("--m", aug_m, "Neighborhood size");
  augment->add_option("--direction", aug_direction, "prev | next | both");
  add_delta_options(augment, aug_delta);
  augment->add_option("--svmlight", aug_svmlight, "Also export the numeric view as SVMLight");

  // train
  fs::path train_sessions, train_schema, train_model_out;
  TrainConfig train_cfg;
  std::string train_weighting = "ndcg_gain";
  auto* train_cmd = app.add_subcommand("train", "Train a LambdaMART model");
  train_cmd->add_option("--sessions", train_sessions, "Sessions JSONL")->required();
  train_cmd->add_option("--schema", train_schema, "Schema JSON")->required();
  train_cmd->add_option("--model-out", train_model_out, "Model JSON output")->required();
  add_train_options(train_cmd, train_cfg, train_weighting, "--seed");

  // eval
  fs::path eval_model, eval_sessions, eval_schema, eval_baseline, eval_out;
  int eval_resamples = 1000;
  double eval_level = 0.95;
  std::uint64_t eval_seed = 0;
  int eval_threshold = 1;
  auto* eval = app.add_subcommand("eval", "Evaluate a model by MRR");
  eval->add_option("--model", eval_model, "Model JSON")->required();
  eval->add_option("--sessions", eval_sessions, "Test sessions JSONL")->required();
  eval->add_option("--schema", eval_schema, "Schema JSON")->required();
  eval->add_option("--baseline", eval_baseline, "Baseline model for a paired comparison");
  eval->add_option("--n-resamples", eval_resamples, "Bootstrap resamples");
  eval->add_option("--level", eval_level, "Confidence level");
  eval->add_option("--seed", eval_seed, "Bootstrap seed");
  eval->add_option("--sale-threshold", eval_threshold, "Minimum label counted as a sale");
  eval->add_option("--out", eval_out, "Report JSON output (default stdout)");

  // experiment
  ExperimentPlan plan;
  SynthConfig exp_synth;
  std::string exp_sizes = "1,3,5", exp_directions = "prev,next,both";
  std::string exp_weighting = "ndcg_gain";
  DeltaFlags exp_delta;
  fs::path exp_out_dir;
  auto* experiment = app.add_subcommand("experiment", "Run the base vs delta model matrix");
  experiment->add_option("--sizes", exp_sizes, "Comma-separated neighborhood sizes");
  experiment->add_option("--directions", exp_directions, "Comma-separated prev,next,both");
  add_delta_options(experiment, exp_delta);
  add_train_options(experiment, plan.train, exp_weighting, "--train-seed");
  add_synth_options(experiment, exp_synth, "--synth-seed");
  experiment->add_option("--sessions", plan.input_sessions, "Input sessions (instead of synth)");
  experiment->add_option("--schema", plan.input_schema, "Input schema (with --sessions)");
  experiment->add_option("--out-dir", exp_out_dir, "Artifact directory")->required();
  experiment->add_option("--seed", plan.seed, "Split and bootstrap seed");
  experiment->add_option("--train-fraction", plan.train_fraction, "Train share of sessions");
  experiment->add_option("--n-resamples", plan.n_resamples, "Bootstrap resamples");
  experiment->add_option("--level", plan.level, "Confidence level");
  experiment->add_option("--sale-threshold", plan.sale_threshold, "Minimum sale label");
  experiment->add_option("--workers", plan.workers, "Parallel training cells");

  // report
  fs::path rep_results, rep_out_dir;
  auto* report = app.add_subcommand("report", "Rebuild table.csv and charts from results.csv");
  report->add_option("--results", rep_results, "results.csv")->required();
  report->add_option("--out-dir", rep_out_dir, "Output directory")->required();

  std::vector<std::string> args = expand_config(argc, argv);
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto delta_config = [](int m, Direction dir, const DeltaFlags& f) {
    DeltaConfig cfg{m, dir, parse_decay(f.decay, f.alpha), parse_boundary(f.boundary)};
    cfg.validate();
    return cfg;
  };

  if (*synth) {
    status = cmd_synth(synth_cfg, synth_out, synth_schema_out);
  } else if (*augment) {
    status = cmd_augment(aug_sessions, aug_schema, aug_out, aug_schema_out,
                         delta_config(aug_m, parse_direction(aug_direction), aug_delta),
                         aug_svmlight);
  } else if (*train_cmd) {
    train_cfg.lambda_weighting = parse_lambda_weighting(train_weighting);
    status = cmd_train(train_sessions, train_schema, train_model_out, train_cfg);
  } else if (*eval) {
    status = cmd_eval(eval_model, eval_sessions, eval_schema, eval_baseline, eval_resamples,
                      eval_level, eval_seed, eval_threshold, eval_out);
  } else if (*experiment) {
    plan.sizes.clear();
    for (const auto& s : split_list(exp_sizes)) {
      try {
        std::size_t used = 0;
        plan.sizes.push_back(std::stoi(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::logic_error&) {
        throw ValidationError("invalid neighborhood size '" + s + "'");
      }
    }
    plan.directions.clear();
    for (const auto& d : split_list(exp_directions)) plan.directions.push_back(parse_direction(d));
    const DeltaConfig dcfg = delta_config(1, Direction::kBoth, exp_delta);
    plan.decay = dcfg.decay;
    plan.boundary = dcfg.boundary;
    plan.train.lambda_weighting = parse_lambda_weighting(exp_weighting);
    if (plan.input_sessions.empty() && plan.input_schema.empty()) plan.synth = exp_synth;
    plan.out_dir = exp_out_dir;
    status = cmd_experiment(plan);
  } else if (*report) {
    status = cmd_report(rep_results, rep_out_dir);
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
