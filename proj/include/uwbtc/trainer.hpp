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

#ifndef UWBTC_TRAINER_HPP
#define UWBTC_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "uwbtc/transformer.hpp"

namespace uwbtc {

struct TrainConfig {
  int batch_size = 64;
  double lr_peak = 1e-3;
  double warmup_fraction = 0.05;
  int max_epochs = 350;
  int early_stop_patience = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainedModel {
  TdoaTransformer model;
  std::vector<EpochRecord> history;  // entry 0 is the untrained model
  int best_epoch = 0;
};

/// Linear warmup from 0 to lr_peak over the first warmup_fraction of steps,
/// then linear decay to 0 at `total_steps`.
double learning_rate(long step, long total_steps, const TrainConfig& config);

/// Adam state for one model; moments are keyed by visit order.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainConfig& config) : config_(config) {}
  void step(TdoaTransformer& model, double lr);

 private:
  TrainConfig config_;
  std::vector<Eigen::MatrixXd> first_;
  std::vector<Eigen::MatrixXd> second_;
  long t_ = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Splits `data` into train/validation with `config.seed`, runs Adam on the MSE
/// loss and returns the parameters with the lowest validation loss.
TrainedModel train(const std::vector<PreparedSample>& data, const ModelConfig& model_config,
                   const Vector3d& extent, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace uwbtc

#endif  // UWBTC_TRAINER_HPP
