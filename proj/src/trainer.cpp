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

#include "uwbtc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uwbtc {
namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = n; k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(idx[k - 1], idx[pick(rng)]);
  }
  return idx;
}

double mean_loss(const TdoaTransformer& model, const std::vector<const PreparedSample*>& set) {
  return set.empty() ? std::numeric_limits<double>::quiet_NaN() : batch_loss(model, set);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) fail(ErrorCode::kInvalidConfig, "batch_size must be >= 1");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "warmup_fraction must lie in (0, 1)");
  }
  if (max_epochs < 1) fail(ErrorCode::kInvalidConfig, "max_epochs must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "validation_fraction must lie in [0, 1)");
  }
  if (!(lr_peak > 0.0)) fail(ErrorCode::kInvalidConfig, "lr_peak must be positive");
}

double learning_rate(long step, long total_steps, const TrainConfig& config) {
  if (total_steps <= 0) return 0.0;
  const double warmup = config.warmup_fraction * static_cast<double>(total_steps);
  const double s = static_cast<double>(std::clamp(step, 0L, total_steps));
  if (s < warmup) return config.lr_peak * s / warmup;
  return config.lr_peak * (static_cast<double>(total_steps) - s) / (static_cast<double>(total_steps) - warmup);
}

void AdamOptimizer::step(TdoaTransformer& model, double lr) {
  ++t_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::size_t slot = 0;
  model.for_each_parameter([&](const std::string&, Param& p) {
    if (slot == first_.size()) {
      first_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
      second_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
    Eigen::MatrixXd& m = first_[slot];
    Eigen::MatrixXd& v = second_[slot];
    m = config_.beta1 * m + (1.0 - config_.beta1) * p.grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + config_.adam_epsilon);
    ++slot;
  });
}

TrainedModel train(const std::vector<PreparedSample>& data, const ModelConfig& model_config,
                   const Vector3d& extent, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) fail(ErrorCode::kInvalidArgument, "empty training dataset");

  std::mt19937_64 rng(config.seed);
  const std::vector<std::size_t> order = shuffled(data.size(), rng);
  std::size_t n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(data.size())));
  if (config.validation_fraction > 0.0 && n_val == 0 && data.size() > 1) n_val = 1;
  std::vector<const PreparedSample*> val_set;
  std::vector<const PreparedSample*> train_set;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_val ? val_set : train_set).push_back(&data[order[k]]);
  }

  TrainedModel result;
  result.model = TdoaTransformer(model_config, extent, config.seed);
  TdoaTransformer& model = result.model;
  AdamOptimizer adam(config);

  const long steps_per_epoch =
      static_cast<long>((train_set.size() + static_cast<std::size_t>(config.batch_size) - 1) /
                        static_cast<std::size_t>(config.batch_size));
  const long total_steps = steps_per_epoch * config.max_epochs;

  auto selection_loss = [&](const EpochRecord& r) { return val_set.empty() ? r.train_loss : r.val_loss; };

  EpochRecord initial{0, mean_loss(model, train_set), mean_loss(model, val_set), 0.0};
  result.history.push_back(initial);
  if (on_epoch) on_epoch(initial);
  double best = selection_loss(initial);
  TdoaTransformer best_model = model;

  long step = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::vector<std::size_t> perm = shuffled(train_set.size(), rng);
    double epoch_loss = 0.0;
    double lr = 0.0;
    std::vector<const PreparedSample*> batch;
    for (std::size_t start = 0; start < perm.size(); start += static_cast<std::size_t>(config.batch_size)) {
      batch.clear();
      const std::size_t stop = std::min(perm.size(), start + static_cast<std::size_t>(config.batch_size));
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_set[perm[k]]);
      const double loss = compute_gradients(model, batch, true, &rng);
      epoch_loss += loss * static_cast<double>(batch.size());
      lr = learning_rate(step, total_steps, config);
      adam.step(model, lr);
      ++step;
    }

    EpochRecord record{epoch, epoch_loss / static_cast<double>(train_set.size()), mean_loss(model, val_set), lr};
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (selection_loss(record) < best) {
      best = selection_loss(record);
      best_model = model;
      result.best_epoch = epoch;
    } else if (epoch - result.best_epoch >= config.early_stop_patience) {
      break;
    }
  }
  result.model = std::move(best_model);
  return result;
}

}  // namespace uwbtc
