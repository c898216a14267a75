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

#include "uwbtc/transformer.hpp"

#include <cmath>

namespace uwbtc {
namespace {

constexpr double kNormEps = 1e-5;

using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void normal_fill(Param& p, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = dist(rng);
}

void init_linear(Linear& l, int in, int out, std::mt19937_64& rng) {
  l.weight.resize(out, in);
  l.bias.resize(1, out);
  normal_fill(l.weight, 1.0 / std::sqrt(static_cast<double>(in)), rng);
}

void init_norm(Param& gain, Param& bias, int d) {
  gain.resize(1, d);
  gain.value.setOnes();
  bias.resize(1, d);
}

MatrixXd linear_forward(const MatrixXd& x, const Linear& l) {
  MatrixXd y = x * l.weight.value.transpose();
  y.rowwise() += l.bias.value.row(0);
  return y;
}

// Accumulates parameter gradients and returns dL/dx.
MatrixXd linear_backward(const MatrixXd& x, const MatrixXd& dy, Linear& l) {
  l.weight.grad.noalias() += dy.transpose() * x;
  l.bias.grad.row(0) += dy.colwise().sum();
  return dy * l.weight.value;
}

struct NormCache {
  MatrixXd xhat;
  VectorXd inv_std;
};

MatrixXd layer_norm_forward(const MatrixXd& x, const Param& gain, const Param& bias, NormCache* cache) {
  const VectorXd mean = x.rowwise().mean();
  MatrixXd centered = x.colwise() - mean;
  const VectorXd var = centered.array().square().rowwise().mean();
  const VectorXd inv_std = (var.array() + kNormEps).rsqrt();
  MatrixXd xhat = centered.array().colwise() * inv_std.array();
  MatrixXd y = xhat.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv_std;
  }
  return y;
}

MatrixXd layer_norm_backward(const MatrixXd& dy, const NormCache& cache, Param& gain, Param& bias) {
  gain.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  bias.grad.row(0) += dy.colwise().sum();
  const ArrayXXd dxhat = dy.array().rowwise() * gain.value.row(0).array();
  const Eigen::ArrayXd mean_dxhat = dxhat.rowwise().mean();
  const Eigen::ArrayXd mean_dxhat_xhat = (dxhat * cache.xhat.array()).rowwise().mean();
  ArrayXXd dx = dxhat.colwise() - mean_dxhat;
  dx -= cache.xhat.array().colwise() * mean_dxhat_xhat;
  return (dx.colwise() * cache.inv_std.array()).matrix();
}

ArrayXXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  ArrayXXd mask(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = keep(rng) ? scale : 0.0;
  return mask;
}

struct LayerTrace {
  MatrixXd input, q, k, v, concat;
  std::vector<MatrixXd> probs;
  ArrayXXd mask_attn, mask_ff;
  NormCache norm1, norm2;
  MatrixXd x1, hidden_pre, hidden;
};

struct Trace {
  std::vector<LayerTrace> layers;
  MatrixXd encoded;
  std::vector<RowVectorXd> head_inputs;  // input to each head layer
  std::vector<RowVectorXd> head_pre;     // pre-activation of each hidden head layer
};

bool dropout_active(const TdoaTransformer& model, bool train_mode) {
  return train_mode && model.config.dropout > 0.0;
}

MatrixXd layer_forward(const MatrixXd& x, const EncoderLayer& layer, const ModelConfig& cfg, bool dropout,
                       std::mt19937_64* rng, LayerTrace* trace) {
  const Eigen::Index n = x.rows();
  const int heads = cfg.n_heads;
  const int dh = cfg.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  MatrixXd q = linear_forward(x, layer.query);
  MatrixXd k = linear_forward(x, layer.key);
  MatrixXd v = linear_forward(x, layer.value);
  MatrixXd concat(n, cfg.d_model);
  if (trace != nullptr) trace->probs.resize(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    MatrixXd probs = softmax_rows(q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale);
    concat.middleCols(h * dh, dh).noalias() = probs * v.middleCols(h * dh, dh);
    if (trace != nullptr) trace->probs[static_cast<std::size_t>(h)] = std::move(probs);
  }
  MatrixXd attn = linear_forward(concat, layer.output);
  if (dropout) {
    ArrayXXd mask = dropout_mask(n, cfg.d_model, cfg.dropout, *rng);
    attn.array() *= mask;
    if (trace != nullptr) trace->mask_attn = std::move(mask);
  }
  NormCache norm1;
  MatrixXd x1 = layer_norm_forward(x + attn, layer.norm1_gain, layer.norm1_bias, &norm1);

  MatrixXd hidden_pre = linear_forward(x1, layer.ff_in);
  MatrixXd hidden = hidden_pre.cwiseMax(0.0);
  MatrixXd ff = linear_forward(hidden, layer.ff_out);
  if (dropout) {
    ArrayXXd mask = dropout_mask(n, cfg.d_model, cfg.dropout, *rng);
    ff.array() *= mask;
    if (trace != nullptr) trace->mask_ff = std::move(mask);
  }
  NormCache norm2;
  MatrixXd x2 = layer_norm_forward(x1 + ff, layer.norm2_gain, layer.norm2_bias, &norm2);

  if (trace != nullptr) {
    trace->input = x;
    trace->q = std::move(q);
    trace->k = std::move(k);
    trace->v = std::move(v);
    trace->concat = std::move(concat);
    trace->norm1 = std::move(norm1);
    trace->norm2 = std::move(norm2);
    trace->x1 = std::move(x1);
    trace->hidden_pre = std::move(hidden_pre);
    trace->hidden = std::move(hidden);
  }
  if (!x2.allFinite()) fail(ErrorCode::kNumericOverflow, "non-finite encoder activations");
  return x2;
}

MatrixXd layer_backward(const MatrixXd& dx2, const LayerTrace& t, EncoderLayer& layer, const ModelConfig& cfg) {
  const int heads = cfg.n_heads;
  const int dh = cfg.d_model / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const MatrixXd dres2 = layer_norm_backward(dx2, t.norm2, layer.norm2_gain, layer.norm2_bias);
  MatrixXd dff = dres2;
  if (t.mask_ff.size() > 0) dff.array() *= t.mask_ff;
  MatrixXd dhidden = linear_backward(t.hidden, dff, layer.ff_out);
  dhidden.array() *= (t.hidden_pre.array() > 0.0).cast<double>();
  const MatrixXd dx1 = dres2 + linear_backward(t.x1, dhidden, layer.ff_in);

  const MatrixXd dres1 = layer_norm_backward(dx1, t.norm1, layer.norm1_gain, layer.norm1_bias);
  MatrixXd dattn = dres1;
  if (t.mask_attn.size() > 0) dattn.array() *= t.mask_attn;
  const MatrixXd dconcat = linear_backward(t.concat, dattn, layer.output);

  MatrixXd dq(t.q.rows(), t.q.cols());
  MatrixXd dk(t.k.rows(), t.k.cols());
  MatrixXd dv(t.v.rows(), t.v.cols());
  for (int h = 0; h < heads; ++h) {
    const MatrixXd& probs = t.probs[static_cast<std::size_t>(h)];
    const auto dc = dconcat.middleCols(h * dh, dh);
    const MatrixXd dprobs = dc * t.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() = probs.transpose() * dc;
    const Eigen::VectorXd row_dot = (dprobs.array() * probs.array()).rowwise().sum();
    const MatrixXd dscores = (probs.array() * (dprobs.array().colwise() - row_dot.array())).matrix() * scale;
    dq.middleCols(h * dh, dh).noalias() = dscores * t.k.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() = dscores.transpose() * t.q.middleCols(h * dh, dh);
  }
  MatrixXd dx = dres1;
  dx += linear_backward(t.input, dq, layer.query);
  dx += linear_backward(t.input, dk, layer.key);
  dx += linear_backward(t.input, dv, layer.value);
  return dx;
}

RowVectorXd head_input(const RowVectorXd& cls_out, const Vector3d& p_tdoa, const Vector3d& extent) {
  RowVectorXd z(cls_out.size() + 3);
  z << cls_out, p_tdoa.cwiseQuotient(extent).transpose();
  return z;
}

Vector3d head_forward(const RowVectorXd& z, const Vector3d& p_tdoa, const TdoaTransformer& model,
                      Trace* trace) {
  RowVectorXd a = z;
  for (std::size_t i = 0; i < model.head.size(); ++i) {
    if (trace != nullptr) trace->head_inputs.push_back(a);
    RowVectorXd pre = linear_forward(a, model.head[i]);
    if (i + 1 < model.head.size()) {
      if (trace != nullptr) trace->head_pre.push_back(pre);
      a = pre.cwiseMax(0.0);
    } else {
      a = std::move(pre);
    }
  }
  Vector3d out = a.transpose();
  if (model.config.residual_output) out += p_tdoa;
  return out;
}

MatrixXd initial_tokens(const PreparedSample& s, const TdoaTransformer& model) {
  const Eigen::Index n = s.patches.values.rows() + 1;
  MatrixXd x(n, model.config.d_model);
  x.row(0) = model.cls.value.row(0);
  x.bottomRows(n - 1).noalias() = s.patches.values * model.embed.weight.value.transpose();
  x.bottomRows(n - 1).rowwise() += model.embed.bias.value.row(0);
  x += s.fixed_encoding;
  if (model.config.encoding.kind == EncodingKind::kLearned) {
    if (n > model.pos_sequence.value.rows()) {
      fail(ErrorCode::kInvalidIndex, "sequence longer than learned encoding table");
    }
    x += model.pos_sequence.value.topRows(n);
  } else {
    x.row(0) += model.pos_cls.value.row(0);
    for (Eigen::Index t = 1; t < n; ++t) {
      x.row(t) += model.pos_within.value.row(s.meta[static_cast<std::size_t>(t)].within_index);
    }
  }
  return x;
}

void initial_tokens_backward(const PreparedSample& s, const MatrixXd& dx, TdoaTransformer& model) {
  const Eigen::Index n = dx.rows();
  model.cls.grad.row(0) += dx.row(0);
  model.embed.weight.grad.noalias() += dx.bottomRows(n - 1).transpose() * s.patches.values;
  model.embed.bias.grad.row(0) += dx.bottomRows(n - 1).colwise().sum();
  if (model.config.encoding.kind == EncodingKind::kLearned) {
    model.pos_sequence.grad.topRows(n) += dx;
  } else {
    model.pos_cls.grad.row(0) += dx.row(0);
    for (Eigen::Index t = 1; t < n; ++t) {
      model.pos_within.grad.row(s.meta[static_cast<std::size_t>(t)].within_index) += dx.row(t);
    }
  }
}

Vector3d forward_traced(const PreparedSample& s, const TdoaTransformer& model, bool train_mode,
                        std::mt19937_64* rng, Trace* trace) {
  const bool dropout = dropout_active(model, train_mode);
  if (dropout && rng == nullptr) fail(ErrorCode::kInvalidArgument, "train mode dropout needs an rng");
  MatrixXd x = initial_tokens(s, model);
  if (trace != nullptr) trace->layers.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    x = layer_forward(x, model.layers[l], model.config, dropout, rng,
                      trace != nullptr ? &trace->layers[l] : nullptr);
  }
  const RowVectorXd z = head_input(x.row(0), s.p_tdoa, model.extent);
  if (trace != nullptr) trace->encoded = x;
  return head_forward(z, s.p_tdoa, model, trace);
}

void backward(const PreparedSample& s, const Vector3d& dpred, const Trace& trace, TdoaTransformer& model) {
  RowVectorXd da = dpred.transpose();
  for (std::size_t i = model.head.size(); i-- > 0;) {
    if (i + 1 < model.head.size()) {
      da.array() *= (trace.head_pre[i].array() > 0.0).cast<double>();
    }
    da = linear_backward(trace.head_inputs[i], da, model.head[i]);
  }
  MatrixXd dx = MatrixXd::Zero(trace.encoded.rows(), trace.encoded.cols());
  dx.row(0) = da.head(model.config.d_model);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    dx = layer_backward(dx, trace.layers[l], model.layers[l], model.config);
  }
  initial_tokens_backward(s, dx, model);
}

}  // namespace

int ModelConfig::max_tokens() const {
  const int k = patch.patches_per_cir();
  return 1 + (patch.strategy == PatchStrategy::kMultiCir ? k : n_anchors * k);
}

EncodingConfig ModelConfig::encoding_config() const {
  EncodingConfig cfg = encoding;
  cfg.d_model = d_model;
  return cfg;
}

void ModelConfig::validate() const {
  patch.validate();
  encoding_config().validate();
  if (n_anchors < 1) fail(ErrorCode::kInvalidConfig, "n_anchors must be positive");
  if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
    fail(ErrorCode::kInvalidConfig, "d_model must be divisible by n_heads");
  }
  if (n_layers < 0 || d_ff < 1) fail(ErrorCode::kInvalidConfig, "bad layer sizes");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::kInvalidConfig, "dropout must lie in [0, 1)");
  if (head_widths.empty() || head_widths.back() != 3) {
    fail(ErrorCode::kInvalidConfig, "regression head must end in 3 outputs");
  }
  if (encoding.spatial() && patch.strategy == PatchStrategy::kMultiCir) {
    fail(ErrorCode::kIncompatibleEncoding,
         "spatial encodings need per-CIR tokens; multi-CIR tokens carry no single anchor");
  }
}

TdoaTransformer::TdoaTransformer(const ModelConfig& cfg, const Vector3d& env_extent, std::uint64_t seed)
    : config(cfg), extent(env_extent) {
  config.validate();
  config.encoding.d_model = config.d_model;
  std::mt19937_64 rng(seed);
  const int d = config.d_model;

  init_linear(embed, config.patch.patch_size(config.n_anchors), d, rng);
  cls.resize(1, d);
  normal_fill(cls, 0.02, rng);
  if (config.encoding.kind == EncodingKind::kLearned) {
    pos_sequence.resize(config.max_tokens(), d);
    normal_fill(pos_sequence, 0.02, rng);
  } else {
    pos_within.resize(config.patch.patches_per_cir(), d);
    normal_fill(pos_within, 0.02, rng);
    pos_cls.resize(1, d);
    normal_fill(pos_cls, 0.02, rng);
  }

  layers.resize(static_cast<std::size_t>(config.n_layers));
  for (auto& layer : layers) {
    init_linear(layer.query, d, d, rng);
    init_linear(layer.key, d, d, rng);
    init_linear(layer.value, d, d, rng);
    init_linear(layer.output, d, d, rng);
    init_norm(layer.norm1_gain, layer.norm1_bias, d);
    init_linear(layer.ff_in, d, config.d_ff, rng);
    init_linear(layer.ff_out, config.d_ff, d, rng);
    init_norm(layer.norm2_gain, layer.norm2_bias, d);
  }

  int in = d + 3;
  for (int width : config.head_widths) {
    head.emplace_back();
    init_linear(head.back(), in, width, rng);
    in = width;
  }
  if (config.residual_output) {
    head.back().weight.value.setZero();
    head.back().bias.value.setZero();
  }
}

void TdoaTransformer::zero_grad() {
  for_each_parameter([](const std::string&, Param& p) { p.grad.setZero(p.value.rows(), p.value.cols()); });
}

std::size_t TdoaTransformer::parameter_count() const {
  std::size_t count = 0;
  for_each_parameter([&](const std::string&, const Param& p) { count += static_cast<std::size_t>(p.value.size()); });
  return count;
}

EncodingTables TdoaTransformer::encoding_tables() const {
  EncodingTables tables;
  tables.sequence = pos_sequence.value;
  tables.within_cir = pos_within.value;
  if (pos_cls.value.size() > 0) tables.cls = pos_cls.value.row(0);
  return tables;
}

PreparedSample prepare(const InputTensor& tensor, const Vector3d& p_tdoa, const Vector3d& truth,
                       const ModelConfig& config, const Vector3d& extent) {
  PreparedSample s;
  s.patches = make_patches(tensor, config.patch);
  s.p_tdoa = p_tdoa;
  s.truth = truth;

  // Encodings with zeroed learned tables leave only the fixed sinusoidal part.
  TokenSequence shell;
  shell.tokens = MatrixXd::Zero(s.patches.values.rows() + 1, config.d_model);
  shell.meta.push_back(TokenMeta{.is_cls = true});
  shell.meta.insert(shell.meta.end(), s.patches.meta.begin(), s.patches.meta.end());
  shell.patches_per_cir = s.patches.patches_per_cir;

  EncodingTables zeros;
  zeros.sequence = MatrixXd::Zero(shell.tokens.rows(), config.d_model);
  zeros.within_cir = MatrixXd::Zero(config.patch.patches_per_cir(), config.d_model);
  zeros.cls = RowVectorXd::Zero(config.d_model);
  s.fixed_encoding = encoding_matrix(shell, config.encoding_config(), extent, zeros);
  s.meta = std::move(shell.meta);
  return s;
}

MatrixXd softmax_rows(const MatrixXd& scores) {
  MatrixXd out = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

MatrixXd attention(const MatrixXd& q, const MatrixXd& k, const MatrixXd& v) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    fail(ErrorCode::kShape, "attention: incompatible Q/K/V shapes");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return softmax_rows(q * k.transpose() * scale) * v;
}

MatrixXd encoder_forward(const MatrixXd& tokens, const TdoaTransformer& model, bool train_mode,
                         std::mt19937_64* rng) {
  if (tokens.cols() != model.config.d_model) fail(ErrorCode::kShape, "token width != d_model");
  const bool dropout = dropout_active(model, train_mode);
  if (dropout && rng == nullptr) fail(ErrorCode::kInvalidArgument, "train mode dropout needs an rng");
  MatrixXd x = tokens;
  for (const auto& layer : model.layers) x = layer_forward(x, layer, model.config, dropout, rng, nullptr);
  return x;
}

Vector3d regression_head(const RowVectorXd& cls_out, const Vector3d& p_tdoa, const TdoaTransformer& model) {
  if (!cls_out.allFinite() || !p_tdoa.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "regression head input not finite");
  }
  return head_forward(head_input(cls_out, p_tdoa, model.extent), p_tdoa, model, nullptr);
}

Vector3d predict(const PreparedSample& sample, const TdoaTransformer& model, bool train_mode,
                 std::mt19937_64* rng) {
  return forward_traced(sample, model, train_mode, rng, nullptr);
}

Vector3d forward_tensor(const InputTensor& tensor, const Vector3d& p_tdoa, const TdoaTransformer& model) {
  const Patches patches = make_patches(tensor, model.config.patch);
  const TokenSequence tokens =
      embed_patches(patches, model.embed.weight.value, model.embed.bias.value.row(0).transpose(),
                    model.cls.value.row(0));
  const TokenSequence encoded =
      apply_encodings(tokens, model.config.encoding_config(), model.extent, model.encoding_tables());
  const MatrixXd out = encoder_forward(encoded.tokens, model, false);
  return regression_head(out.row(0), p_tdoa, model);
}

double compute_gradients(TdoaTransformer& model, const std::vector<const PreparedSample*>& batch,
                         bool train_mode, std::mt19937_64* rng) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty batch");
  model.zero_grad();
  const double norm = 1.0 / (3.0 * static_cast<double>(batch.size()));
  double loss = 0.0;
  for (const PreparedSample* s : batch) {
    Trace trace;
    const Vector3d pred = forward_traced(*s, model, train_mode, rng, &trace);
    const Vector3d err = pred - s->truth;
    loss += err.squaredNorm() * norm;
    backward(*s, 2.0 * norm * err, trace, model);
  }
  if (!std::isfinite(loss)) fail(ErrorCode::kNumericOverflow, "non-finite loss");
  return loss;
}

double batch_loss(const TdoaTransformer& model, const std::vector<const PreparedSample*>& batch) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty batch");
  double loss = 0.0;
  for (const PreparedSample* s : batch) loss += (predict(*s, model) - s->truth).squaredNorm();
  return loss / (3.0 * static_cast<double>(batch.size()));
}

}  // namespace uwbtc
