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

#ifndef UWBTC_TRANSFORMER_HPP
#define UWBTC_TRANSFORMER_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uwbtc/encodings.hpp"
#include "uwbtc/patching.hpp"

namespace uwbtc {

struct ModelConfig {
  PatchConfig patch;
  EncodingConfig encoding;  // encoding.d_model is overwritten by d_model
  Ordering ordering = Ordering::kFixed;
  int n_anchors = 15;  // N_total of the environment
  int d_model = 64;
  int n_layers = 4;
  int n_heads = 8;
  int d_ff = 256;
  double dropout = 0.15;
  std::vector<int> head_widths = {256, 128, 64, 3};
  /// Head predicts a correction added to the TDoA estimate.
  bool residual_output = true;

  /// Multi-CIR patching needs n_total rows, so time-based input is zero padded.
  [[nodiscard]] bool zero_pad() const {
    return ordering == Ordering::kFixed || patch.strategy == PatchStrategy::kMultiCir;
  }
  [[nodiscard]] int max_tokens() const;
  [[nodiscard]] EncodingConfig encoding_config() const;
  /// Throws invalid-config / incompatible-encoding on bad combinations.
  void validate() const;
};

/// Trainable tensor with its gradient accumulator.
struct Param {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  void resize(Eigen::Index rows, Eigen::Index cols) {
    value = Eigen::MatrixXd::Zero(rows, cols);
    grad = Eigen::MatrixXd::Zero(rows, cols);
  }
};

/// y = W x + b with W (out x in) and b stored as a 1 x out row.
struct Linear {
  Param weight;
  Param bias;
};

struct EncoderLayer {
  Linear query, key, value, output;
  Param norm1_gain, norm1_bias;
  Linear ff_in, ff_out;
  Param norm2_gain, norm2_bias;
};

/// Encoder-only transformer with CLS readout and an MLP regression head.
class TdoaTransformer {
 public:
  TdoaTransformer() = default;
  /// Parameters drawn from `seed`; the last head layer starts at zero.
  TdoaTransformer(const ModelConfig& config, const Vector3d& extent, std::uint64_t seed);

  ModelConfig config;
  Vector3d extent = Vector3d::Ones();

  Linear embed;
  Param cls;               // 1 x d
  Param pos_sequence;      // learned kind: max_tokens x d
  Param pos_within;        // spatial kinds: K x d
  Param pos_cls;           // spatial kinds: 1 x d
  std::vector<EncoderLayer> layers;
  std::vector<Linear> head;

  /// Visits every parameter as (name, Param&) in a fixed order.
  template <typename F>
  void for_each_parameter(F&& visit);
  template <typename F>
  void for_each_parameter(F&& visit) const;

  void zero_grad();
  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] EncodingTables encoding_tables() const;
};

/// Model input for one sample after preprocessing. Independent of parameters.
struct PreparedSample {
  Patches patches;
  std::vector<TokenMeta> meta;      // includes CLS at index 0
  Eigen::MatrixXd fixed_encoding;   // non-learned part of the encoding, n_tokens x d
  Vector3d p_tdoa = Vector3d::Zero();
  Vector3d truth = Vector3d::Zero();
};

PreparedSample prepare(const InputTensor& tensor, const Vector3d& p_tdoa, const Vector3d& truth,
                       const ModelConfig& config, const Vector3d& extent);

/// softmax(Q K^T / sqrt(h)) V for one head.
Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v);

/// Row-wise softmax, numerically stabilized.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores);

/// Runs the encoder stack on already-encoded tokens. Dropout needs `rng` in train mode.
Eigen::MatrixXd encoder_forward(const Eigen::MatrixXd& tokens, const TdoaTransformer& model,
                                bool train_mode, std::mt19937_64* rng = nullptr);

/// MLP over [cls_out, p_tdoa / extent]; adds p_tdoa back in residual mode.
Vector3d regression_head(const Eigen::RowVectorXd& cls_out, const Vector3d& p_tdoa,
                         const TdoaTransformer& model);

/// Corrected position for a prepared sample (eval mode unless `train_mode`).
Vector3d predict(const PreparedSample& sample, const TdoaTransformer& model, bool train_mode = false,
                 std::mt19937_64* rng = nullptr);

/// Corrected position from an input tensor and a TDoA estimate.
Vector3d forward_tensor(const InputTensor& tensor, const Vector3d& p_tdoa, const TdoaTransformer& model);

/// Accumulates d(MSE)/d(param) over `batch` into each Param::grad (after zeroing)
/// and returns the batch loss, mean over samples and coordinates.
double compute_gradients(TdoaTransformer& model, const std::vector<const PreparedSample*>& batch,
                         bool train_mode = false, std::mt19937_64* rng = nullptr);

/// MSE loss without gradients.
double batch_loss(const TdoaTransformer& model, const std::vector<const PreparedSample*>& batch);

template <typename F>
void TdoaTransformer::for_each_parameter(F&& visit) {
  std::as_const(*this).for_each_parameter([&](const std::string& name, const Param& p) {
    visit(name, const_cast<Param&>(p));
  });
}

template <typename F>
void TdoaTransformer::for_each_parameter(F&& visit) const {
  auto linear = [&](const std::string& name, const Linear& l) {
    visit(name + ".weight", l.weight);
    visit(name + ".bias", l.bias);
  };
  linear("embed", embed);
  visit("cls", cls);
  if (pos_sequence.value.size() > 0) visit("pos.sequence", pos_sequence);
  if (pos_within.value.size() > 0) visit("pos.within_cir", pos_within);
  if (pos_cls.value.size() > 0) visit("pos.cls", pos_cls);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    const EncoderLayer& layer = layers[l];
    linear(p + "query", layer.query);
    linear(p + "key", layer.key);
    linear(p + "value", layer.value);
    linear(p + "output", layer.output);
    visit(p + "norm1.gain", layer.norm1_gain);
    visit(p + "norm1.bias", layer.norm1_bias);
    linear(p + "ff_in", layer.ff_in);
    linear(p + "ff_out", layer.ff_out);
    visit(p + "norm2.gain", layer.norm2_gain);
    visit(p + "norm2.bias", layer.norm2_bias);
  }
  for (std::size_t h = 0; h < head.size(); ++h) linear("head." + std::to_string(h), head[h]);
}

}  // namespace uwbtc

#endif  // UWBTC_TRANSFORMER_HPP
