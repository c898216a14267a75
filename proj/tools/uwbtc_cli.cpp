// Copyright 2026 The uwbtc Authors
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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uwbtc/experiment.hpp"
#include "uwbtc/serialization.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
};

uwbtc::ExperimentConfig load(const Options& opts) {
  auto overrides = opts.overrides;
  if (!opts.output_dir.empty()) overrides.push_back("output_dir=\"" + opts.output_dir + "\"");
  if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
  std::optional<std::filesystem::path> path;
  if (!opts.config_path.empty()) path = opts.config_path;
  return uwbtc::load_experiment(path, overrides);
}

void log_line(const std::string& line) { std::cerr << line << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UWB TDoA error correction: simulation, training, sweeps and complexity tables"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  app.add_option("-c,--config", opts.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("-s,--set", opts.overrides, "Override a config field, e.g. --set model.d_model=32");
  app.add_option("-o,--output-dir", opts.output_dir, "Output directory (config: output_dir)");
  app.add_option("--seed", opts.seed, "Seed for simulation, initialization and training");

  auto* simulate = app.add_subcommand("simulate", "Write synthetic train/eval datasets");
  auto* baseline = app.add_subcommand("baseline", "Uncorrected TDoA solver metrics");
  std::string baseline_dataset;
  baseline->add_option("dataset", baseline_dataset, "Dataset (default: eval dataset)");
  auto* train = app.add_subcommand("train", "Train a model, write checkpoint and history");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate the checkpoint on the eval dataset");
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate every grid configuration");
  auto* complexity = app.add_subcommand("complexity", "Operation counts for every grid configuration");
  auto* pareto = app.add_subcommand("pareto", "Pareto front of a sweep results table");
  std::string pareto_input;
  std::string pareto_output;
  pareto->add_option("results", pareto_input, "Sweep results CSV")->required()->check(CLI::ExistingFile);
  pareto->add_option("--out", pareto_output, "Output CSV (default: pareto.csv next to the input)");
  auto* show = app.add_subcommand("config", "Print the effective config as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pareto->parsed()) {
      std::optional<std::filesystem::path> out;
      if (!pareto_output.empty()) out = pareto_output;
      uwbtc::run_pareto(pareto_input, out, log_line);
      return 0;
    }
    const auto config = load(opts);
    if (show->parsed()) {
      std::cout << nlohmann::json(config).dump(2) << '\n';
    } else if (simulate->parsed()) {
      uwbtc::run_simulate(config, log_line);
    } else if (baseline->parsed()) {
      std::optional<std::filesystem::path> dataset;
      if (!baseline_dataset.empty()) dataset = baseline_dataset;
      const auto report = uwbtc::run_baseline(config, dataset, log_line);
      std::cout << uwbtc::report_to_json(report).dump(2) << '\n';
    } else if (train->parsed()) {
      uwbtc::run_train(config, log_line);
    } else if (evaluate->parsed()) {
      const auto report = uwbtc::run_evaluate(config, log_line);
      std::cout << uwbtc::report_to_json(report).dump(2) << '\n';
    } else if (sweep->parsed()) {
      uwbtc::run_sweep(config, log_line);
    } else if (complexity->parsed()) {
      uwbtc::run_complexity(config, log_line);
    }
  } catch (const uwbtc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
