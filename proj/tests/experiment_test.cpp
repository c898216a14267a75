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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "uwbtc/checkpoint.hpp"
#include "uwbtc/dataset_io.hpp"
#include "uwbtc/experiment.hpp"

namespace uwbtc {
namespace {

namespace fs = std::filesystem;
using testing::small_dataset;
using testing::small_environment;
using testing::tiny_config;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uwbtc_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

using DatasetIo = TempDir;

TEST_F(DatasetIo, JsonlRoundTrip) {
  const auto env = small_environment();
  const auto samples = small_dataset(env, 12, 3);
  write_dataset(samples, dir_ / "d.jsonl");
  const auto back = read_dataset(dir_ / "d.jsonl");
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    EXPECT_EQ(back[k].sample_id, samples[k].sample_id);
    EXPECT_EQ(back[k].true_position, samples[k].true_position);
    EXPECT_EQ(back[k].tx_time, samples[k].tx_time);
    ASSERT_EQ(back[k].raw_cirs.size(), samples[k].raw_cirs.size());
    for (std::size_t a = 0; a < samples[k].raw_cirs.size(); ++a) {
      const auto& x = samples[k].raw_cirs[a];
      const auto& y = back[k].raw_cirs[a];
      EXPECT_EQ(x.anchor_id, y.anchor_id);
      EXPECT_EQ(x.iq, y.iq);
      EXPECT_EQ(x.first_path_index, y.first_path_index);
      EXPECT_EQ(x.rx_time, y.rx_time);
      EXPECT_EQ(x.los, y.los);
      EXPECT_EQ(x.timestamp_error, y.timestamp_error);
    }
  }
}

TEST_F(DatasetIo, Failures) {
  EXPECT_EQ(code_of([&] { read_dataset(dir_ / "missing.jsonl"); }), ErrorCode::kIo);
  EXPECT_EQ(code_of([&] { read_dataset(dir_ / "data.h5"); }), ErrorCode::kIo);
  std::ofstream(dir_ / "bad.jsonl") << "{\"sample_id\": 1\n";
  EXPECT_EQ(code_of([&] { read_dataset(dir_ / "bad.jsonl"); }), ErrorCode::kIo);
}

TEST_F(DatasetIo, Anchors) {
  std::ofstream(dir_ / "a.csv") << "id,x,y,z\n1,0,0,2.5\n2,10,0,2.5\n3,5,8,2.5\n";
  const auto csv = read_anchors(dir_ / "a.csv");
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[2].id, 3);
  EXPECT_EQ(csv[2].position, Vector3d(5, 8, 2.5));
  std::ofstream(dir_ / "a.json") << R"([{"id": 7, "x": 1, "y": 2, "z": 3}])";
  const auto json = read_anchors(dir_ / "a.json");
  ASSERT_EQ(json.size(), 1u);
  EXPECT_EQ(json[0].id, 7);
  EXPECT_EQ(code_of([&] { read_anchors(dir_ / "none.csv"); }), ErrorCode::kIo);
}

TEST_F(DatasetIo, Stats) {
  const auto env = small_environment();
  auto samples = small_dataset(env, 20, 4, 0.0);
  samples[0].raw_cirs.resize(2);
  const auto stats = dataset_stats(samples);
  EXPECT_EQ(stats.n_samples, 20u);
  EXPECT_EQ(stats.under_three_anchors, 1u);
  EXPECT_NEAR(stats.mean_anchors, (19 * 5 + 2) / 20.0, 1e-12);
  EXPECT_GE(stats.los_fraction, 0.0);
  EXPECT_LE(stats.los_fraction, 1.0);
}

using CheckpointIo = TempDir;

TEST_F(CheckpointIo, RoundTripPreservesPredictions) {
  const auto env = small_environment();
  const auto cfg = tiny_config(EncodingKind::kSpatialTime, Ordering::kTimeBased);
  TrainedModel trained{TdoaTransformer(cfg, env.extent, 1), {{0, 2.0, 3.0, 0.0}, {1, 1.5, 2.5, 1e-3}}, 1};
  testing::randomize(trained.model, 8);
  save_checkpoint(trained, dir_ / "m.json");
  const auto back = load_checkpoint(dir_ / "m.json");
  EXPECT_EQ(back.best_epoch, 1);
  ASSERT_EQ(back.history.size(), 2u);
  EXPECT_EQ(back.history[1].val_loss, 2.5);
  const auto data = prepare_dataset(small_dataset(env, 10, 2), env, cfg, BaselineConfig{});
  for (const auto& s : data.samples) EXPECT_EQ(predict(s, trained.model), predict(s, back.model));
  EXPECT_EQ(code_of([&] { load_checkpoint(dir_ / "nope.json"); }), ErrorCode::kIo);
}

TEST(Config, DefaultGridSize) {
  const ExperimentConfig c;
  const auto all = enumerate_sweep(c.sweep, c.effective_model());
  EXPECT_EQ(all.size(), 252u);
  std::size_t multi = 0;
  for (const auto& m : all) multi += m.patch.strategy == PatchStrategy::kMultiCir ? 1 : 0;
  EXPECT_EQ(multi, 108u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, Key) {
  auto m = tiny_config(EncodingKind::kSpatial, Ordering::kTimeBased, PatchStrategy::kPerCir, 150);
  m.d_model = 64;
  EXPECT_EQ(config_key(m), "per_cir/time_based/spatial/L150/d64");
}

TEST(Config, Overrides) {
  nlohmann::json doc = ExperimentConfig();
  apply_override(doc, "model.d_model=32");
  apply_override(doc, "model.encoding=spatial_time");
  apply_override(doc, "baseline.planar=false");
  apply_override(doc, "model.head_widths=[64,3]");
  EXPECT_EQ(doc["model"]["d_model"], 32);
  EXPECT_EQ(doc["model"]["encoding"], "spatial_time");
  EXPECT_EQ(doc["baseline"]["planar"], false);
  EXPECT_EQ(doc["model"]["head_widths"].size(), 2u);
  EXPECT_EQ(code_of([&] { apply_override(doc, "no_equals_sign"); }), ErrorCode::kInvalidConfig);

  const auto loaded = load_experiment(std::nullopt, {"model.d_model=32", "seed=7"});
  EXPECT_EQ(loaded.model.d_model, 32);
  EXPECT_EQ(loaded.effective_train().seed, 7u);
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of([] { load_experiment(std::nullopt, {"model.bogus=1"}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { load_experiment(std::nullopt, {"model.patching=multi_cir", "model.l_patch=75"}); }),
            ErrorCode::kIncompatibleEncoding);
  EXPECT_EQ(code_of([] { load_experiment(std::nullopt, {"model.d_model=30"}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { load_experiment(fs::path("/nonexistent/config.json")); }), ErrorCode::kIo);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c;
  c.model.d_model = 128;
  c.sweep.desk_epochs = 3;
  c.simulation.eval_points = 10;
  const ExperimentConfig back = nlohmann::json(c).get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
}

ExperimentConfig small_experiment(const fs::path& dir) {
  ExperimentConfig c;
  c.environment = small_environment();
  c.model = tiny_config();
  c.train.max_epochs = 2;
  c.train.batch_size = 8;
  c.output_dir = dir.string();
  return c;
}

using Evaluation = TempDir;

TEST_F(Evaluation, UnsolvableCountedAndAllLevelsReported) {
  const auto c = small_experiment(dir_);
  auto samples = small_dataset(c.environment, 30, 6, 0.0);
  samples[3].raw_cirs.resize(2);
  samples[9].raw_cirs.resize(1);
  write_dataset(samples, dir_ / "eval.jsonl");
  const auto report = run_baseline(c, std::nullopt);
  EXPECT_EQ(report.unsolvable, 2u);
  EXPECT_EQ(report.baseline.n_samples, 28u);
  const auto doc = read_json(dir_ / "baseline_metrics.json");
  EXPECT_EQ(doc["unsolvable"], 2);
  for (const char* key : {"cep50", "cep75", "cep90", "cep95", "cep99"})
    EXPECT_TRUE(doc["baseline"]["cep"].contains(key)) << key;
  std::vector<std::string> header;
  EXPECT_EQ(read_csv(dir_ / "baseline_estimates.csv", &header).size(), 28u);
}

TEST_F(Evaluation, UntrainedModelReproducesBaseline) {
  const auto c = small_experiment(dir_);
  const auto samples = small_dataset(c.environment, 25, 7);
  const TdoaTransformer model(c.effective_model(), c.environment.extent, 3);
  const auto report = evaluate_model(samples, model, c);
  ASSERT_TRUE(report.corrected.has_value());
  for (std::size_t k = 0; k < report.truths.size(); ++k)
    EXPECT_LT((report.corrected_estimates[k] - report.baseline_estimates[k]).norm(), 1e-12);
  EXPECT_NEAR(report.corrected->mae, report.baseline.mae, 1e-12);
}

TEST_F(Evaluation, TrainThenEvaluate) {
  const auto c = small_experiment(dir_);
  write_dataset(small_dataset(c.environment, 60, 8), dir_ / "train.jsonl");
  write_dataset(small_dataset(c.environment, 20, 9), dir_ / "eval.jsonl");
  const auto trained = run_train(c);
  EXPECT_EQ(trained.history.size(), 3u);
  EXPECT_TRUE(fs::exists(dir_ / "model.json"));
  EXPECT_TRUE(fs::exists(dir_ / "history.csv"));
  const auto report = run_evaluate(c);
  ASSERT_TRUE(report.corrected.has_value());
  EXPECT_TRUE(read_json(dir_ / "metrics.json").contains("mae_reduction"));
}

using Sweep = TempDir;

TEST_F(Sweep, ResumesAndRetriesFailedRows) {
  auto c = small_experiment(dir_);
  c.sweep.groups = {SweepGroup{PatchStrategy::kPerCir, {Ordering::kTimeBased}, {EncodingKind::kSpatial}, {75, 150}, {8}}};
  c.sweep.desk_epochs = 1;
  c.sweep.desk_train_samples = 30;
  c.sweep.desk_eval_samples = 10;
  write_dataset(small_dataset(c.environment, 40, 10), dir_ / "train.jsonl");
  write_dataset(small_dataset(c.environment, 15, 11), dir_ / "eval.jsonl");

  const auto first = run_sweep(c);
  ASSERT_EQ(first.size(), 2u);
  for (const auto& r : first) EXPECT_EQ(r.status, "ok");
  EXPECT_TRUE(fs::exists(dir_ / "sweep_pareto.csv"));

  // Mark one row with a sentinel score and the other as failed.
  std::vector<std::string> header;
  auto rows = read_csv(dir_ / "sweep_results.csv", &header);
  ASSERT_EQ(rows.size(), 2u);
  auto r0 = sweep_row_from_csv(header, rows[0]);
  auto r1 = sweep_row_from_csv(header, rows[1]);
  r0.mae = 123.0;
  r1.status = "failed: injected";
  write_csv(dir_ / "sweep_results.csv", sweep_csv_header(), {sweep_csv_row(r0), sweep_csv_row(r1)});

  const auto second = run_sweep(c);
  ASSERT_EQ(second.size(), 2u);
  int sentinel = 0;
  for (const auto& r : second) {
    EXPECT_EQ(r.status, "ok");
    if (r.mae == 123.0) ++sentinel;
  }
  EXPECT_EQ(sentinel, 1);

  const auto front = run_pareto(dir_ / "sweep_results.csv", std::nullopt);
  EXPECT_FALSE(front.empty());
  EXPECT_TRUE(fs::exists(dir_ / "pareto.csv"));
}

TEST_F(Sweep, ComplexityTable) {
  auto c = small_experiment(dir_);
  c.environment = default_environment();
  c.model = ExperimentConfig().model;
  const auto rows = run_complexity(c);
  EXPECT_EQ(rows.size(), 252u);
  std::vector<std::string> header;
  EXPECT_EQ(read_csv(dir_ / "complexity.csv", &header).size(), 253u);
}

TEST(SweepCsv, RowRoundTrip) {
  SweepResult r;
  r.config = tiny_config(EncodingKind::kSpatialTime, Ordering::kTimeBased, PatchStrategy::kPerCir, 150);
  r.total_ops = 12345;
  r.mae = 0.25;
  r.cep = {{50, 0.1}, {75, 0.2}, {90, 0.3}, {95, 0.4}, {99, 0.5}};
  r.status = "failed: out of memory, retry";
  const auto back = sweep_row_from_csv(sweep_csv_header(), sweep_csv_row(r));
  EXPECT_EQ(config_key(back.config), config_key(r.config));
  EXPECT_EQ(back.total_ops, r.total_ops);
  EXPECT_EQ(back.mae, r.mae);
  EXPECT_EQ(back.cep, r.cep);
  // The writer does not quote, so separators inside a status are replaced.
  EXPECT_EQ(back.status, "failed: out of memory; retry");
}

}  // namespace
}  // namespace uwbtc
