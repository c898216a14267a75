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

#include "uwbtc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "uwbtc/checkpoint.hpp"
#include "uwbtc/serialization.hpp"

namespace uwbtc {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

template <typename T, typename Parse>
void read_enum_list(const nlohmann::json& j, const char* key, std::vector<T>& out, Parse parse) {
  if (!j.contains(key)) return;
  out.clear();
  for (const auto& s : j.at(key)) out.push_back(parse(s.get<std::string>()));
}

template <typename T>
std::vector<std::string> enum_names(const std::vector<T>& values) {
  std::vector<std::string> names;
  for (T v : values) names.emplace_back(to_string(v));
  return names;
}

// Rejects keys of `doc` that the default document does not have. Arrays are
// not descended into.
void check_known_keys(const nlohmann::json& doc, const nlohmann::json& reference, const std::string& prefix) {
  if (!doc.is_object()) return;
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.is_object() || !reference.contains(key)) {
      fail(ErrorCode::kInvalidConfig, "unknown config key '" + path + "'");
    }
    if (value.is_object()) check_known_keys(value, reference.at(key), path);
  }
}

void emit(const Logger& log, const std::string& message) {
  if (log) log(message);
}

std::vector<Sample> subsample(std::vector<Sample> samples, std::size_t limit) {
  if (limit == 0 || samples.size() <= limit) return samples;
  // Evenly strided so every part of the trajectory stays represented.
  std::vector<Sample> out;
  out.reserve(limit);
  const double stride = static_cast<double>(samples.size()) / static_cast<double>(limit);
  for (std::size_t k = 0; k < limit; ++k) {
    out.push_back(std::move(samples[static_cast<std::size_t>(std::floor(k * stride))]));
  }
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double measured_n_av(const ExperimentConfig& config) {
  if (config.sweep.n_av > 0.0) return config.sweep.n_av;
  const auto path = config.resolve(config.eval_dataset);
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kInvalidConfig, "sweep.n_av <= 0 needs an evaluation dataset at " + path.string());
  }
  return dataset_stats(read_dataset(path)).mean_anchors;
}

}  // namespace

std::vector<SweepGroup> default_sweep_groups() {
  SweepGroup multi;
  multi.patching = PatchStrategy::kMultiCir;
  multi.orderings = {Ordering::kFixed, Ordering::kTimeBased};
  multi.encodings = {EncodingKind::kLearned};
  multi.l_patches = {1, 3, 5, 6, 10, 15, 30, 50, 75};
  multi.d_models = {8, 16, 32, 64, 128, 256};

  SweepGroup per_cir;
  per_cir.patching = PatchStrategy::kPerCir;
  per_cir.orderings = {Ordering::kFixed, Ordering::kTimeBased};
  per_cir.encodings = {EncodingKind::kLearned, EncodingKind::kSpatial, EncodingKind::kSpatialTime};
  per_cir.l_patches = {6, 15, 30, 50, 75, 150};
  per_cir.d_models = {32, 64, 128, 256};
  return {multi, per_cir};
}

void ExperimentConfig::validate() const {
  environment.validate();
  effective_model().validate();
  effective_train().validate();
  if (!(simulation.drop_probability >= 0.0 && simulation.drop_probability < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "simulation.drop_probability must lie in [0, 1)");
  }
  if (simulation.train_line_spacing <= 0.0 || simulation.train_step <= 0.0 || simulation.eval_step <= 0.0) {
    fail(ErrorCode::kInvalidConfig, "trajectory spacing must be positive");
  }
  if (sweep.desk_epochs < 1) fail(ErrorCode::kInvalidConfig, "sweep.desk_epochs must be >= 1");
  for (const auto& group : sweep.groups) {
    if (group.orderings.empty() || group.encodings.empty() || group.l_patches.empty() || group.d_models.empty()) {
      fail(ErrorCode::kInvalidConfig, "sweep group lists must be non-empty");
    }
  }
  // Every grid point must be a valid model.
  for (const auto& m : enumerate_sweep(sweep, effective_model())) m.validate();
}

std::filesystem::path ExperimentConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : std::filesystem::path(output_dir) / p;
}

ModelConfig ExperimentConfig::effective_model() const {
  ModelConfig m = model;
  m.n_anchors = static_cast<int>(environment.anchors.size());
  m.encoding.d_model = m.d_model;
  return m;
}

TrainConfig ExperimentConfig::effective_train() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
  j = {{"train_line_spacing", c.train_line_spacing},
       {"train_step", c.train_step},
       {"eval_points", c.eval_points},
       {"eval_step", c.eval_step},
       {"drop_probability", c.drop_probability},
       {"tag_height", c.tag_height}};
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
  read(j, "train_line_spacing", c.train_line_spacing);
  read(j, "train_step", c.train_step);
  read(j, "eval_points", c.eval_points);
  read(j, "eval_step", c.eval_step);
  read(j, "drop_probability", c.drop_probability);
  read(j, "tag_height", c.tag_height);
}

void to_json(nlohmann::json& j, const SweepGroup& g) {
  j = {{"patching", to_string(g.patching)},
       {"orderings", enum_names(g.orderings)},
       {"encodings", enum_names(g.encodings)},
       {"l_patches", g.l_patches},
       {"d_models", g.d_models}};
}

void from_json(const nlohmann::json& j, SweepGroup& g) {
  if (j.contains("patching")) g.patching = parse_patch_strategy(j.at("patching").get<std::string>());
  read_enum_list(j, "orderings", g.orderings, parse_ordering);
  read_enum_list(j, "encodings", g.encodings, parse_encoding_kind);
  read(j, "l_patches", g.l_patches);
  read(j, "d_models", g.d_models);
}

void to_json(nlohmann::json& j, const SweepConfig& c) {
  j = {{"groups", c.groups},
       {"desk_scale", c.desk_scale},
       {"desk_epochs", c.desk_epochs},
       {"desk_train_samples", c.desk_train_samples},
       {"desk_eval_samples", c.desk_eval_samples},
       {"n_av", c.n_av}};
}

void from_json(const nlohmann::json& j, SweepConfig& c) {
  read(j, "groups", c.groups);
  read(j, "desk_scale", c.desk_scale);
  read(j, "desk_epochs", c.desk_epochs);
  read(j, "desk_train_samples", c.desk_train_samples);
  read(j, "desk_eval_samples", c.desk_eval_samples);
  read(j, "n_av", c.n_av);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"environment", c.environment},
       {"anchors_file", c.anchors_file},
       {"channel", c.channel},
       {"simulation", c.simulation},
       {"train_dataset", c.train_dataset},
       {"eval_dataset", c.eval_dataset},
       {"checkpoint", c.checkpoint},
       {"model", c.model},
       {"train", c.train},
       {"baseline", c.baseline},
       {"sweep", c.sweep},
       {"output_dir", c.output_dir},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  read(j, "environment", c.environment);
  read(j, "anchors_file", c.anchors_file);
  read(j, "channel", c.channel);
  read(j, "simulation", c.simulation);
  read(j, "train_dataset", c.train_dataset);
  read(j, "eval_dataset", c.eval_dataset);
  read(j, "checkpoint", c.checkpoint);
  read(j, "model", c.model);
  read(j, "train", c.train);
  read(j, "baseline", c.baseline);
  read(j, "sweep", c.sweep);
  read(j, "output_dir", c.output_dir);
  read(j, "seed", c.seed);
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::kInvalidConfig, "override must look like key.path=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  nlohmann::json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->is_object()) fail(ErrorCode::kInvalidConfig, "cannot descend into '" + path[k] + "'");
    node = &(*node)[path[k]];
  }
  if (!node->is_object() && !node->is_null()) fail(ErrorCode::kInvalidConfig, "cannot set '" + key + "'");
  (*node)[path.back()] = value;
}

ExperimentConfig load_experiment(const std::optional<std::filesystem::path>& path,
                                 const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::object();
  if (path) doc = read_json(*path);
  for (const auto& o : overrides) apply_override(doc, o);
  check_known_keys(doc, nlohmann::json(ExperimentConfig{}), "");

  ExperimentConfig config;
  try {
    doc.get_to(config);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  if (!config.anchors_file.empty()) {
    std::filesystem::path anchors(config.anchors_file);
    if (anchors.is_relative() && path && path->has_parent_path()) anchors = path->parent_path() / anchors;
    config.environment.anchors = read_anchors(anchors);
  }
  config.validate();
  return config;
}

std::vector<ModelConfig> enumerate_sweep(const SweepConfig& sweep, const ModelConfig& base) {
  std::vector<ModelConfig> configs;
  for (const auto& group : sweep.groups) {
    for (Ordering ordering : group.orderings) {
      for (EncodingKind encoding : group.encodings) {
        for (int l_patch : group.l_patches) {
          for (int d_model : group.d_models) {
            ModelConfig m = base;
            m.patch.strategy = group.patching;
            m.patch.l_patch = l_patch;
            m.ordering = ordering;
            m.encoding.kind = encoding;
            m.d_model = d_model;
            m.encoding.d_model = d_model;
            configs.push_back(m);
          }
        }
      }
    }
  }
  return configs;
}

std::string config_key(const ModelConfig& config) {
  std::ostringstream out;
  out << to_string(config.patch.strategy) << '/' << to_string(config.ordering) << '/'
      << to_string(config.encoding.kind) << "/L" << config.patch.l_patch << "/d" << config.d_model;
  return out.str();
}

SimulateReport run_simulate(const ExperimentConfig& config, const Logger& log) {
  const auto& sim = config.simulation;
  const auto& env = config.environment;
  const auto train_points = grid_trajectory(env, sim.train_line_spacing, sim.train_step, sim.tag_height);
  const auto eval_points = random_trajectory(env, sim.eval_points, sim.eval_step, sim.tag_height, config.seed);
  const auto train = generate_dataset(env, train_points, sim.drop_probability, config.seed, config.channel);
  auto eval = generate_dataset(env, eval_points, sim.drop_probability, config.seed + 1, config.channel);
  // Keep sample ids unique across the two files.
  for (auto& s : eval) s.sample_id += static_cast<int>(train.size());

  SimulateReport report;
  report.train_path = config.resolve(config.train_dataset);
  report.eval_path = config.resolve(config.eval_dataset);
  write_dataset(train, report.train_path);
  write_dataset(eval, report.eval_path);
  write_json(nlohmann::json(env), std::filesystem::path(config.output_dir) / "environment.json");
  report.train_stats = dataset_stats(train);
  report.eval_stats = dataset_stats(eval);
  for (const auto& [name, stats, path] : {std::tuple{"train", report.train_stats, report.train_path},
                                          std::tuple{"eval", report.eval_stats, report.eval_path}}) {
    std::ostringstream msg;
    msg << name << ": " << stats.n_samples << " samples, mean anchors " << stats.mean_anchors << ", LOS fraction "
        << stats.los_fraction << " -> " << path.string();
    emit(log, msg.str());
  }
  return report;
}

EvaluationReport evaluate_baseline(const std::vector<Sample>& samples, const ExperimentConfig& config) {
  EvaluationReport report;
  for (const auto& sample : samples) {
    const auto estimate = baseline_estimate(sample, config.environment, config.baseline);
    if (!estimate) {
      ++report.unsolvable;
      continue;
    }
    report.sample_ids.push_back(sample.sample_id);
    report.truths.push_back(sample.true_position);
    report.baseline_estimates.push_back(estimate->position);
  }
  if (report.truths.empty()) fail(ErrorCode::kInsufficientData, "no solvable samples");
  report.baseline = metrics_report(report.baseline_estimates, report.truths);
  return report;
}

EvaluationReport evaluate_model(const std::vector<Sample>& samples, const TdoaTransformer& model,
                                const ExperimentConfig& config) {
  const PreparedDataset data = prepare_dataset(samples, config.environment, model.config, config.baseline);
  if (data.samples.empty()) fail(ErrorCode::kInsufficientData, "no solvable samples");
  EvaluationReport report;
  report.unsolvable = data.unsolvable_ids.size();
  report.sample_ids = data.sample_ids;
  for (const auto& s : data.samples) {
    report.truths.push_back(s.truth);
    report.baseline_estimates.push_back(s.p_tdoa);
    report.corrected_estimates.push_back(predict(s, model));
  }
  report.baseline = metrics_report(report.baseline_estimates, report.truths);
  report.corrected = metrics_report(report.corrected_estimates, report.truths);
  return report;
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  auto metrics = [](const MetricsReport& m) {
    nlohmann::json cep;
    for (const auto& [q, r] : m.cep) cep["cep" + std::to_string(q)] = r;
    return nlohmann::json{{"mae", m.mae}, {"cep", cep}, {"n_samples", m.n_samples}};
  };
  nlohmann::json doc = {{"baseline", metrics(report.baseline)}, {"unsolvable", report.unsolvable}};
  if (report.corrected) {
    doc["corrected"] = metrics(*report.corrected);
    doc["mae_reduction"] = 1.0 - report.corrected->mae / report.baseline.mae;
  }
  return doc;
}

void write_estimates_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  std::vector<std::string> header = {"sample_id", "true_x", "true_y", "true_z",
                                     "baseline_x", "baseline_y", "baseline_z", "baseline_error"};
  const bool corrected = !report.corrected_estimates.empty();
  if (corrected) {
    for (const char* c : {"corrected_x", "corrected_y", "corrected_z", "corrected_error"}) header.emplace_back(c);
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < report.truths.size(); ++k) {
    const auto& t = report.truths[k];
    const auto& b = report.baseline_estimates[k];
    std::vector<std::string> row = {std::to_string(report.sample_ids[k]), format_number(t.x()), format_number(t.y()),
                                    format_number(t.z()),  format_number(b.x()), format_number(b.y()),
                                    format_number(b.z()),  format_number((b - t).norm())};
    if (corrected) {
      const auto& c = report.corrected_estimates[k];
      for (double v : {c.x(), c.y(), c.z(), (c - t).norm()}) row.push_back(format_number(v));
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

EvaluationReport run_baseline(const ExperimentConfig& config, const std::optional<std::filesystem::path>& dataset,
                              const Logger& log) {
  const auto path = dataset.value_or(config.resolve(config.eval_dataset));
  const auto samples = read_dataset(path);
  auto report = evaluate_baseline(samples, config);
  const std::filesystem::path out(config.output_dir);
  write_json(report_to_json(report), out / "baseline_metrics.json");
  write_estimates_csv(report, out / "baseline_estimates.csv");
  std::ostringstream msg;
  msg << "baseline MAE " << report.baseline.mae << " m over " << report.baseline.n_samples << " samples ("
      << report.unsolvable << " unsolvable)";
  emit(log, msg.str());
  return report;
}

TrainedModel run_train(const ExperimentConfig& config, const Logger& log) {
  const auto samples = read_dataset(config.resolve(config.train_dataset));
  const ModelConfig model_config = config.effective_model();
  const auto data = prepare_dataset(samples, config.environment, model_config, config.baseline);
  {
    std::ostringstream msg;
    msg << "training " << config_key(model_config) << " on " << data.samples.size() << " samples ("
        << data.unsolvable_ids.size() << " unsolvable skipped)";
    emit(log, msg.str());
  }
  const auto start = std::chrono::steady_clock::now();
  auto trained = train(data.samples, model_config, config.environment.extent, config.effective_train(),
                       [&](const EpochRecord& r) {
                         std::ostringstream msg;
                         msg << "epoch " << r.epoch << " train " << r.train_loss << " val " << r.val_loss;
                         emit(log, msg.str());
                       });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_checkpoint(trained, config.resolve(config.checkpoint));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : trained.history) {
    rows.push_back({std::to_string(r.epoch), format_number(r.train_loss), format_number(r.val_loss),
                    format_number(r.lr)});
  }
  write_csv(std::filesystem::path(config.output_dir) / "history.csv", {"epoch", "train_loss", "val_loss", "lr"}, rows);
  std::ostringstream msg;
  msg << "best epoch " << trained.best_epoch << ", " << seconds << " s";
  emit(log, msg.str());
  return trained;
}

EvaluationReport run_evaluate(const ExperimentConfig& config, const Logger& log) {
  const auto trained = load_checkpoint(config.resolve(config.checkpoint));
  const auto samples = read_dataset(config.resolve(config.eval_dataset));
  auto report = evaluate_model(samples, trained.model, config);
  const std::filesystem::path out(config.output_dir);
  write_json(report_to_json(report), out / "metrics.json");
  write_estimates_csv(report, out / "estimates.csv");
  std::ostringstream msg;
  msg << "baseline MAE " << report.baseline.mae << " m, corrected MAE " << report.corrected->mae << " m ("
      << report.unsolvable << " unsolvable)";
  emit(log, msg.str());
  return report;
}

std::vector<std::string> sweep_csv_header() {
  return {"key",   "patching", "ordering", "encoding", "l_patch", "d_model", "n_layers", "total_ops", "mae",
          "cep50", "cep75",    "cep90",    "cep95",    "cep99",   "status"};
}

std::vector<std::string> sweep_csv_row(const SweepResult& r) {
  std::vector<std::string> row = {config_key(r.config),
                                  std::string(to_string(r.config.patch.strategy)),
                                  std::string(to_string(r.config.ordering)),
                                  std::string(to_string(r.config.encoding.kind)),
                                  std::to_string(r.config.patch.l_patch),
                                  std::to_string(r.config.d_model),
                                  std::to_string(r.config.n_layers),
                                  format_number(r.total_ops),
                                  format_number(r.mae)};
  for (int q : kCepLevels) {
    const auto it = r.cep.find(q);
    row.push_back(it == r.cep.end() ? "nan" : format_number(it->second));
  }
  row.push_back(sanitize(r.status));
  return row;
}

SweepResult sweep_row_from_csv(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  auto cell = [&](const std::string& name) -> const std::string& {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::kIo, "results table lacks column '" + name + "'");
    const auto k = static_cast<std::size_t>(it - header.begin());
    if (k >= row.size()) fail(ErrorCode::kIo, "short results row");
    return row[k];
  };
  auto number = [](const std::string& s) { return s == "nan" ? std::nan("") : std::stod(s); };
  SweepResult r;
  try {
    r.config.patch.strategy = parse_patch_strategy(cell("patching"));
    r.config.ordering = parse_ordering(cell("ordering"));
    r.config.encoding.kind = parse_encoding_kind(cell("encoding"));
    r.config.patch.l_patch = std::stoi(cell("l_patch"));
    r.config.d_model = std::stoi(cell("d_model"));
    r.config.encoding.d_model = r.config.d_model;
    r.config.n_layers = std::stoi(cell("n_layers"));
    r.total_ops = number(cell("total_ops"));
    r.mae = number(cell("mae"));
    for (int q : kCepLevels) r.cep[q] = number(cell("cep" + std::to_string(q)));
  } catch (const std::logic_error& e) {
    fail(ErrorCode::kIo, std::string("bad results row: ") + e.what());
  }
  r.status = cell("status");
  return r;
}

std::vector<SweepResult> run_sweep(const ExperimentConfig& config, const Logger& log) {
  const std::filesystem::path out(config.output_dir);
  const auto results_path = out / "sweep_results.csv";
  const auto header = sweep_csv_header();

  std::vector<SweepResult> results;
  std::set<std::string> done;
  if (std::filesystem::exists(results_path)) {
    std::vector<std::string> existing_header;
    for (const auto& row : read_csv(results_path, &existing_header)) {
      auto r = sweep_row_from_csv(existing_header, row);
      if (r.status != "ok") continue;  // failed rows are retried
      done.insert(config_key(r.config));
      results.push_back(std::move(r));
    }
  }
  // Rewrite with only the kept rows, then append as configurations finish.
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : results) rows.push_back(sweep_csv_row(r));
    write_csv(results_path, header, rows);
  }

  auto train_samples = read_dataset(config.resolve(config.train_dataset));
  auto eval_samples = read_dataset(config.resolve(config.eval_dataset));
  TrainConfig train_config = config.effective_train();
  if (config.sweep.desk_scale) {
    train_samples = subsample(std::move(train_samples), config.sweep.desk_train_samples);
    eval_samples = subsample(std::move(eval_samples), config.sweep.desk_eval_samples);
    train_config.max_epochs = std::min(train_config.max_epochs, config.sweep.desk_epochs);
  }
  const double n_total = static_cast<double>(config.environment.anchors.size());
  const double n_av = std::min(n_total, measured_n_av(config));

  const auto grid = enumerate_sweep(config.sweep, config.effective_model());
  std::size_t index = 0;
  for (const auto& model_config : grid) {
    ++index;
    const std::string key = config_key(model_config);
    if (done.count(key)) continue;
    SweepResult r;
    r.config = model_config;
    try {
      r.total_ops = op_count(model_config, n_total, n_av).total_ops;
      const auto data = prepare_dataset(train_samples, config.environment, model_config, config.baseline);
      const auto trained = train(data.samples, model_config, config.environment.extent, train_config);
      const auto report = evaluate_model(eval_samples, trained.model, config);
      r.mae = report.corrected->mae;
      r.cep = report.corrected->cep;
    } catch (const std::exception& e) {
      r.mae = std::nan("");
      r.status = std::string("failed: ") + e.what();
    }
    std::ofstream append(results_path, std::ios::app);
    const auto cells = sweep_csv_row(r);
    for (std::size_t k = 0; k < cells.size(); ++k) append << (k ? "," : "") << cells[k];
    append << '\n';
    if (!append) fail(ErrorCode::kIo, "cannot append to " + results_path.string());
    std::ostringstream msg;
    msg << "[" << index << "/" << grid.size() << "] " << key << " ops " << r.total_ops << " mae " << r.mae << " "
        << r.status;
    emit(log, msg.str());
    results.push_back(std::move(r));
  }
  run_pareto(results_path, out / "sweep_pareto.csv", log);
  return results;
}

std::vector<std::pair<ModelConfig, OperationCount>> run_complexity(const ExperimentConfig& config, const Logger& log) {
  const double n_total = static_cast<double>(config.environment.anchors.size());
  const double n_av = std::min(n_total, measured_n_av(config));
  std::vector<std::pair<ModelConfig, OperationCount>> table;
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : enumerate_sweep(config.sweep, config.effective_model())) {
    const auto ops = op_count(m, n_total, n_av);
    rows.push_back({config_key(m), std::string(to_string(m.patch.strategy)), std::string(to_string(m.ordering)),
                    std::string(to_string(m.encoding.kind)), std::to_string(m.patch.l_patch),
                    std::to_string(m.d_model), format_number(ops.n_tokens), format_number(ops.embedding_ops),
                    format_number(ops.attention_ops), format_number(ops.feedforward_ops),
                    format_number(ops.head_ops), format_number(ops.total_ops)});
    table.emplace_back(m, ops);
  }
  // The pairwise CNN corrector runs once per available anchor pair.
  const auto pairs = static_cast<std::uint64_t>(n_total);
  rows.push_back({"cnn_baseline", "", "", "", "", "", "", "", "", "", "",
                  std::to_string(cnn_baseline_ops(pairs))});
  write_csv(std::filesystem::path(config.output_dir) / "complexity.csv",
            {"key", "patching", "ordering", "encoding", "l_patch", "d_model", "n_tokens", "embedding_ops",
             "attention_ops", "feedforward_ops", "head_ops", "total_ops"},
            rows);
  std::ostringstream msg;
  msg << table.size() << " configurations, n_total " << n_total << ", n_av " << n_av << "; CNN reference "
      << cnn_baseline_ops(pairs) << " MACs";
  emit(log, msg.str());
  return table;
}

std::vector<SweepResult> run_pareto(const std::filesystem::path& results_csv,
                                    const std::optional<std::filesystem::path>& output, const Logger& log) {
  std::vector<std::string> header;
  std::vector<SweepResult> results;
  for (const auto& row : read_csv(results_csv, &header)) results.push_back(sweep_row_from_csv(header, row));
  const auto front = pareto_front(results);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : front) rows.push_back(sweep_csv_row(r));
  const auto path = output.value_or(results_csv.parent_path() / "pareto.csv");
  write_csv(path, sweep_csv_header(), rows);
  emit(log, std::to_string(front.size()) + " Pareto-optimal of " + std::to_string(results.size()) + " -> " +
                path.string());
  return front;
}

}  // namespace uwbtc
