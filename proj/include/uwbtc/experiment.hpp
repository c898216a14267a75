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

#ifndef UWBTC_EXPERIMENT_HPP
#define UWBTC_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwbtc/channel_sim.hpp"
#include "uwbtc/complexity.hpp"
#include "uwbtc/dataset_io.hpp"
#include "uwbtc/metrics.hpp"
#include "uwbtc/pipeline.hpp"
#include "uwbtc/trainer.hpp"

namespace uwbtc {

/// Trajectories and link dropout for synthetic datasets.
struct SimulationConfig {
  double train_line_spacing = 0.5;  // meters between lawnmower lines
  double train_step = 0.2;
  std::size_t eval_points = 1000;
  double eval_step = 0.3;
  /// Per-anchor drop probability; 0.587 leaves about 6.2 of 15 anchors.
  double drop_probability = 0.587;
  double tag_height = 0.3;
};

/// One block of the architecture grid; every combination of its lists is run.
struct SweepGroup {
  PatchStrategy patching = PatchStrategy::kPerCir;
  std::vector<Ordering> orderings;
  std::vector<EncodingKind> encodings;
  std::vector<int> l_patches;
  std::vector<int> d_models;
};

/// Multi-CIR: 2 orderings x learned x 9 patch lengths x 6 widths.
/// Per-CIR: 2 orderings x 3 encodings x 6 patch lengths x 4 widths.
std::vector<SweepGroup> default_sweep_groups();

struct SweepConfig {
  std::vector<SweepGroup> groups = default_sweep_groups();
  /// Desk scale caps epochs and dataset sizes; off means the full training config.
  bool desk_scale = true;
  int desk_epochs = 40;
  std::size_t desk_train_samples = 1000;
  std::size_t desk_eval_samples = 500;
  /// Average available anchors used for complexity tables; <= 0 measures it
  /// from the evaluation dataset when one exists.
  double n_av = 6.2;
};

struct ExperimentConfig {
  Environment environment = default_environment();
  /// Optional CSV/JSON anchor list replacing environment.anchors.
  std::string anchors_file;
  ChannelModel channel;
  SimulationConfig simulation;
  /// Relative paths resolve against output_dir.
  std::string train_dataset = "train.jsonl";
  std::string eval_dataset = "eval.jsonl";
  std::string checkpoint = "model.json";
  ModelConfig model;
  TrainConfig train;
  BaselineConfig baseline;
  SweepConfig sweep;
  std::string output_dir = "out";
  /// Single seed for simulation, initialization and training.
  std::uint64_t seed = 42;

  /// Throws invalid-config / incompatible-encoding / incompatible-ordering.
  void validate() const;
  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;
  /// Model config with n_anchors taken from the environment.
  [[nodiscard]] ModelConfig effective_model() const;
  [[nodiscard]] TrainConfig effective_train() const;
};

void to_json(nlohmann::json& j, const SimulationConfig& c);
void from_json(const nlohmann::json& j, SimulationConfig& c);
void to_json(nlohmann::json& j, const SweepGroup& g);
void from_json(const nlohmann::json& j, SweepGroup& g);
void to_json(nlohmann::json& j, const SweepConfig& c);
void from_json(const nlohmann::json& j, SweepConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Sets a dotted key ("model.d_model=32") in a config document. The value is
/// parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Loads a config file (or defaults when `path` is empty), applies overrides,
/// loads the anchors file if any, and validates. Unknown keys are rejected.
ExperimentConfig load_experiment(const std::optional<std::filesystem::path>& path,
                                 const std::vector<std::string>& overrides = {});

/// Every model configuration of the sweep grid, based on `base`.
std::vector<ModelConfig> enumerate_sweep(const SweepConfig& sweep, const ModelConfig& base);

/// Stable identifier such as "per_cir/time_based/spatial/L150/d64".
std::string config_key(const ModelConfig& config);

using Logger = std::function<void(const std::string&)>;

struct SimulateReport {
  std::filesystem::path train_path, eval_path;
  DatasetStats train_stats, eval_stats;
};
SimulateReport run_simulate(const ExperimentConfig& config, const Logger& log = {});

struct EvaluationReport {
  MetricsReport baseline;
  std::optional<MetricsReport> corrected;
  std::size_t unsolvable = 0;
  std::vector<int> sample_ids;
  std::vector<Vector3d> truths, baseline_estimates, corrected_estimates;
};

/// Uncorrected solver on every sample; unsolvable ones are counted and excluded.
EvaluationReport evaluate_baseline(const std::vector<Sample>& samples, const ExperimentConfig& config);

/// Baseline and corrected estimates on the solvable samples.
EvaluationReport evaluate_model(const std::vector<Sample>& samples, const TdoaTransformer& model,
                                const ExperimentConfig& config);

nlohmann::json report_to_json(const EvaluationReport& report);
void write_estimates_csv(const EvaluationReport& report, const std::filesystem::path& path);

/// Baseline over `dataset` (eval dataset by default); writes metrics JSON and estimates CSV.
EvaluationReport run_baseline(const ExperimentConfig& config, const std::optional<std::filesystem::path>& dataset,
                              const Logger& log = {});

/// Trains on the train dataset, writes checkpoint and history CSV.
TrainedModel run_train(const ExperimentConfig& config, const Logger& log = {});

/// Loads the checkpoint and evaluates it on the eval dataset; writes metrics JSON and estimates CSV.
EvaluationReport run_evaluate(const ExperimentConfig& config, const Logger& log = {});

/// Trains and evaluates every grid configuration not already in the results
/// file, then writes the Pareto table. Failures are recorded per row.
std::vector<SweepResult> run_sweep(const ExperimentConfig& config, const Logger& log = {});

/// Operation counts for every grid configuration plus the CNN reference.
std::vector<std::pair<ModelConfig, OperationCount>> run_complexity(const ExperimentConfig& config,
                                                                   const Logger& log = {});

/// Pareto front of a results CSV, written next to it (or to `output`).
std::vector<SweepResult> run_pareto(const std::filesystem::path& results_csv,
                                    const std::optional<std::filesystem::path>& output, const Logger& log = {});

std::vector<std::string> sweep_csv_header();
std::vector<std::string> sweep_csv_row(const SweepResult& r);
SweepResult sweep_row_from_csv(const std::vector<std::string>& header, const std::vector<std::string>& row);

}  // namespace uwbtc

#endif  // UWBTC_EXPERIMENT_HPP
