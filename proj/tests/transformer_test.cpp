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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "test_support.hpp"
#include "uwbtc/cir_pipeline.hpp"
#include "uwbtc/trainer.hpp"

namespace uwbtc {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using testing::randomize;
using testing::small_dataset;
using testing::small_environment;
using testing::tiny_config;

using Grid = std::vector<std::vector<double>>;

Grid to_grid(const MatrixXd& m) {
  Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

// y = x W^T + b with plain loops.
Grid naive_linear(const Grid& x, const Linear& l) {
  const auto& w = l.weight.value;
  Grid y(x.size(), std::vector<double>(static_cast<std::size_t>(w.rows())));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (Eigen::Index o = 0; o < w.rows(); ++o) {
      double acc = l.bias.value(0, o);
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += x[i][c] * w(o, c);
      y[i][o] = acc;
    }
  }
  return y;
}

Grid naive_norm(const Grid& x, const Param& gain, const Param& bias) {
  Grid y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(x[i].size());
    double mean = 0.0;
    for (double v : x[i]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= n;
    for (std::size_t c = 0; c < x[i].size(); ++c) {
      y[i][c] = (x[i][c] - mean) / std::sqrt(var + 1e-5) * gain.value(0, c) + bias.value(0, c);
    }
  }
  return y;
}

Grid naive_attention(const Grid& q, const Grid& k, const Grid& v, std::size_t offset, std::size_t width) {
  const std::size_t n = q.size();
  Grid out(n, std::vector<double>(width, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < width; ++c) dot += q[i][offset + c] * k[j][offset + c];
      s[j] = dot / std::sqrt(static_cast<double>(width));
    }
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double& e : s) z += (e = std::exp(e - m));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < width; ++c) out[i][c] += s[j] / z * v[j][offset + c];
  }
  return out;
}

Grid naive_layer(const Grid& x, const EncoderLayer& layer, int n_heads) {
  const Grid q = naive_linear(x, layer.query), k = naive_linear(x, layer.key), v = naive_linear(x, layer.value);
  const std::size_t d = x[0].size();
  const std::size_t width = d / static_cast<std::size_t>(n_heads);
  Grid concat(x.size(), std::vector<double>(d));
  for (int h = 0; h < n_heads; ++h) {
    const Grid a = naive_attention(q, k, v, h * width, width);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t c = 0; c < width; ++c) concat[i][h * width + c] = a[i][c];
  }
  Grid y = naive_linear(concat, layer.output);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) y[i][c] += x[i][c];
  y = naive_norm(y, layer.norm1_gain, layer.norm1_bias);
  Grid f = naive_linear(y, layer.ff_in);
  for (auto& row : f)
    for (double& e : row) e = std::max(e, 0.0);
  f = naive_linear(f, layer.ff_out);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) f[i][c] += y[i][c];
  return naive_norm(f, layer.norm2_gain, layer.norm2_bias);
}

Vector3d naive_head(const std::vector<double>& cls_out, const Vector3d& p_tdoa, const TdoaTransformer& model) {
  Grid z(1, cls_out);
  for (int a = 0; a < 3; ++a) z[0].push_back(p_tdoa(a) / model.extent(a));
  for (std::size_t i = 0; i < model.head.size(); ++i) {
    z = naive_linear(z, model.head[i]);
    if (i + 1 < model.head.size())
      for (double& e : z[0]) e = std::max(e, 0.0);
  }
  Vector3d out(z[0][0], z[0][1], z[0][2]);
  return model.config.residual_output ? Vector3d(p_tdoa + out) : out;
}

TEST(Attention, SingleTokenReturnsValue) {
  const MatrixXd q = MatrixXd::Random(1, 4), k = MatrixXd::Random(1, 4), v = MatrixXd::Random(1, 4);
  EXPECT_TRUE(attention(q, k, v).isApprox(v, 1e-15));
}

TEST(Attention, ZeroQueryAveragesValues) {
  const MatrixXd v = MatrixXd::Random(5, 3);
  const MatrixXd out = attention(MatrixXd::Zero(5, 3), MatrixXd::Random(5, 3), v);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LT((out.row(i) - v.colwise().mean()).norm(), 1e-12);
}

TEST(Attention, MatchesLoopOracle) {
  std::srand(7);
  const MatrixXd q = MatrixXd::Random(3, 4), k = MatrixXd::Random(3, 4), v = MatrixXd::Random(3, 4);
  const Grid oracle = naive_attention(to_grid(q), to_grid(k), to_grid(v), 0, 4);
  const MatrixXd out = attention(q, k, v);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(out(i, c), oracle[i][c], 1e-10);
}

TEST(Attention, ShapeMismatch) {
  try {
    attention(MatrixXd::Zero(3, 4), MatrixXd::Zero(3, 5), MatrixXd::Zero(3, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(Softmax, RowsSumToOneAndStayFinite) {
  MatrixXd s = MatrixXd::Random(6, 9) * 50.0;
  s(0, 0) = 1e300;
  const MatrixXd p = softmax_rows(s);
  EXPECT_TRUE(p.allFinite());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
    EXPECT_GE(p.row(i).minCoeff(), 0.0);
  }
}

TEST(Encoder, HandComputedTwoTokenLayer) {
  ModelConfig c = tiny_config();
  c.d_model = 2;
  c.n_heads = 1;
  c.d_ff = 2;
  c.encoding.kind = EncodingKind::kLearned;
  TdoaTransformer model(c, Vector3d(10, 10, 3), 1);
  auto& l = model.layers[0];
  for (Linear* lin : {&l.query, &l.key, &l.value, &l.output}) {
    lin->weight.value = MatrixXd::Identity(2, 2);
    lin->bias.value.setZero();
  }
  l.ff_in.weight.value.setZero();
  l.ff_in.bias.value.setZero();
  l.ff_out.weight.value.setZero();
  l.ff_out.bias.value.setZero();

  MatrixXd x(2, 2);
  x << 1, 0, 0, 1;
  const MatrixXd out = encoder_forward(x, model, false);

  // Scores are diag(1/sqrt 2); row 0 attends with weight w to itself.
  const double a = 1.0 / std::sqrt(2.0);
  const double w = std::exp(a) / (std::exp(a) + 1.0);
  // x0 + attn = (1 + w, 1 - w): mean 1, deviations +-w, then a second norm of (+-v).
  const double v = w / std::sqrt(w * w + 1e-5);
  const double s = v / std::sqrt(v * v + 1e-5);
  EXPECT_NEAR(out(0, 0), s, 1e-9);
  EXPECT_NEAR(out(0, 1), -s, 1e-9);
  EXPECT_NEAR(out(1, 0), -s, 1e-9);
  EXPECT_NEAR(out(1, 1), s, 1e-9);
}

TEST(Encoder, MatchesLoopOracle) {
  for (int heads : {1, 2, 4}) {
    ModelConfig c = tiny_config();
    c.n_heads = heads;
    c.n_layers = 2;
    TdoaTransformer model(c, Vector3d(12, 8, 3), 3);
    randomize(model, 5);
    const MatrixXd x = MatrixXd::Random(7, 8);
    Grid g = to_grid(x);
    for (const auto& layer : model.layers) g = naive_layer(g, layer, heads);
    const MatrixXd out = encoder_forward(x, model, false);
    ASSERT_EQ(out.rows(), x.rows());
    ASSERT_EQ(out.cols(), x.cols());
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 8; ++j) EXPECT_NEAR(out(i, j), g[i][j], 1e-10) << "heads " << heads;

    const Vector3d p(3, 4, 0.3);
    const Vector3d head = regression_head(out.row(0), p, model);
    EXPECT_LT((head - naive_head(g[0], p, model)).norm(), 1e-10);
  }
}

TEST(Encoder, EvalModeDeterministicTrainModeStochastic) {
  TdoaTransformer model(tiny_config(), Vector3d(12, 8, 3), 3);
  const MatrixXd x = MatrixXd::Random(6, 8);
  EXPECT_EQ(encoder_forward(x, model, false), encoder_forward(x, model, false));
  std::mt19937_64 rng(1);
  EXPECT_NE(encoder_forward(x, model, true, &rng), encoder_forward(x, model, false));
}

TEST(Encoder, NonFiniteInput) {
  TdoaTransformer model(tiny_config(), Vector3d(12, 8, 3), 3);
  MatrixXd x = MatrixXd::Random(3, 8);
  x(1, 1) = std::numeric_limits<double>::infinity();
  try {
    encoder_forward(x, model, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumericOverflow);
  }
}

TEST(Head, WidthsAndZeroWeights) {
  ModelConfig c = tiny_config();
  c.d_model = 32;
  c.n_heads = 8;
  c.head_widths = {256, 128, 64, 3};
  TdoaTransformer model(c, Vector3d(30, 10, 3), 2);
  ASSERT_EQ(model.head.size(), 4u);
  const int expected_in[] = {35, 256, 128, 64};
  const int expected_out[] = {256, 128, 64, 3};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(model.head[i].weight.value.cols(), expected_in[i]);
    EXPECT_EQ(model.head[i].weight.value.rows(), expected_out[i]);
  }
  const Vector3d p(4, 5, 0.3);
  for (auto& l : model.head) {
    l.weight.value.setZero();
    l.bias.value.setZero();
  }
  EXPECT_EQ(regression_head(RowVectorXd::Random(32), p, model), p);
  model.config.residual_output = false;
  model.head.back().bias.value << 1.5, -2.0, 0.25;
  EXPECT_EQ(regression_head(RowVectorXd::Random(32), p, model), Vector3d(1.5, -2.0, 0.25));
}

TEST(Model, ParameterGroupsFollowConfig) {
  TdoaTransformer spatial(tiny_config(EncodingKind::kSpatial), Vector3d(12, 8, 3), 1);
  TdoaTransformer learned(tiny_config(EncodingKind::kLearned), Vector3d(12, 8, 3), 1);
  std::vector<std::string> a, b;
  spatial.for_each_parameter([&](const std::string& n, const Param&) { a.push_back(n); });
  learned.for_each_parameter([&](const std::string& n, const Param&) { b.push_back(n); });
  EXPECT_NE(std::find(a.begin(), a.end(), "pos.within_cir"), a.end());
  EXPECT_EQ(std::find(a.begin(), a.end(), "pos.sequence"), a.end());
  EXPECT_NE(std::find(b.begin(), b.end(), "pos.sequence"), b.end());
  EXPECT_EQ(learned.pos_sequence.value.rows(), 1 + 5 * 2);
  // Multi-CIR embeds n_total * l_patch values per token.
  TdoaTransformer multi(tiny_config(EncodingKind::kLearned, Ordering::kFixed, PatchStrategy::kMultiCir, 30),
                        Vector3d(12, 8, 3), 1);
  EXPECT_EQ(multi.embed.weight.value.cols(), 5 * 30);
  EXPECT_EQ(multi.pos_sequence.value.rows(), 1 + 5);
}

TEST(Model, ConfigValidation) {
  ModelConfig c = tiny_config();
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config(EncodingKind::kSpatial, Ordering::kFixed, PatchStrategy::kMultiCir, 30);
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompatibleEncoding);
  }
  c = tiny_config();
  c.head_widths = {16, 4};
  EXPECT_THROW(c.validate(), Error);
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<EncodingKind, Ordering, bool>> {};

// Central differences on every parameter group, compared through the group norm.
TEST_P(GradientCheck, MatchesFiniteDifferences) {
  const auto [kind, ordering, train_mode] = GetParam();
  const auto env = small_environment();
  const ModelConfig c = tiny_config(kind, ordering);
  const auto data = prepare_dataset(small_dataset(env, 4, 21), env, c);
  ASSERT_GE(data.samples.size(), 2u);
  std::vector<const PreparedSample*> batch = {&data.samples[0], &data.samples[1]};

  TdoaTransformer model(c, env.extent, 9);
  randomize(model, 13);

  constexpr std::uint64_t kDropSeed = 77;
  auto loss = [&](TdoaTransformer& m) {
    std::mt19937_64 rng(kDropSeed);
    return compute_gradients(m, batch, train_mode, &rng);
  };
  loss(model);
  std::vector<MatrixXd> analytic;
  model.for_each_parameter([&](const std::string&, Param& p) { analytic.push_back(p.grad); });

  constexpr double kStep = 1e-4;
  std::size_t group = 0;
  std::size_t groups = 0;
  model.for_each_parameter([&](const std::string& name, Param& p) {
    const MatrixXd& g = analytic[group++];
    double diff = 0.0, norm_a = 0.0, norm_n = 0.0;
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      double& w = p.value.data()[k];
      const double saved = w;
      w = saved + kStep;
      const double up = loss(model);
      w = saved - kStep;
      const double down = loss(model);
      w = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      diff += (numeric - g.data()[k]) * (numeric - g.data()[k]);
      norm_a += g.data()[k] * g.data()[k];
      norm_n += numeric * numeric;
    }
    if (name.ends_with("key.bias")) {
      // Softmax ignores a shift shared by all keys, so this gradient is exactly zero.
      EXPECT_LT(std::sqrt(norm_a), 1e-10) << name;
      EXPECT_LT(std::sqrt(norm_n), 1e-8) << name;
    } else {
      const double scale = std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-12});
      EXPECT_LT(std::sqrt(diff) / scale, 1e-4) << name;
      EXPECT_GT(std::sqrt(norm_a), 1e-8) << name;
    }
    ++groups;
  });
  EXPECT_GT(groups, 15u);
}

INSTANTIATE_TEST_SUITE_P(Kinds, GradientCheck,
                         ::testing::Values(std::tuple{EncodingKind::kSpatial, Ordering::kFixed, false},
                                           std::tuple{EncodingKind::kSpatialTime, Ordering::kTimeBased, false},
                                           std::tuple{EncodingKind::kLearned, Ordering::kFixed, false},
                                           std::tuple{EncodingKind::kSpatial, Ordering::kTimeBased, true}));

TEST(Gradients, ZeroLossGivesZeroGradient) {
  const auto env = small_environment();
  const ModelConfig c = tiny_config();
  auto data = prepare_dataset(small_dataset(env, 3, 4), env, c);
  TdoaTransformer model(c, env.extent, 9);
  randomize(model, 3);
  for (auto& s : data.samples) s.truth = predict(s, model);
  std::vector<const PreparedSample*> batch;
  for (const auto& s : data.samples) batch.push_back(&s);
  EXPECT_LT(compute_gradients(model, batch), 1e-24);
  model.for_each_parameter([](const std::string& name, const Param& p) {
    EXPECT_LT(p.grad.cwiseAbs().maxCoeff(), 1e-10) << name;
  });
}

TEST(Gradients, DuplicatedSampleSameGradient) {
  const auto env = small_environment();
  const ModelConfig c = tiny_config();
  const auto data = prepare_dataset(small_dataset(env, 2, 4), env, c);
  TdoaTransformer model(c, env.extent, 9);
  randomize(model, 3);
  compute_gradients(model, {&data.samples[0]});
  std::vector<MatrixXd> single;
  model.for_each_parameter([&](const std::string&, const Param& p) { single.push_back(p.grad); });
  compute_gradients(model, {&data.samples[0], &data.samples[0]});
  std::size_t k = 0;
  model.for_each_parameter([&](const std::string& name, const Param& p) {
    EXPECT_TRUE(p.grad.isApprox(single[k++], 1e-12) || p.grad.norm() < 1e-15) << name;
  });
}

TEST(Forward, PreparedAndPublicPathsAgree) {
  const auto env = small_environment();
  for (EncodingKind kind : {EncodingKind::kLearned, EncodingKind::kSpatial, EncodingKind::kSpatialTime}) {
    for (Ordering ordering : {Ordering::kFixed, Ordering::kTimeBased}) {
      const ModelConfig c = tiny_config(kind, ordering);
      TdoaTransformer model(c, env.extent, 2);
      randomize(model, 8);
      for (const auto& sample : small_dataset(env, 5, 6)) {
        const auto est = baseline_estimate(sample, env);
        if (!est) continue;
        const auto tensor = build_input_tensor(sample, env, ordering, c.zero_pad());
        const Vector3d a = predict(prepare(tensor, est->position, sample.true_position, c, env.extent), model);
        const Vector3d b = forward_tensor(tensor, est->position, model);
        const Vector3d e = forward(sample, env, model);
        EXPECT_LT((a - b).norm(), 1e-10);
        EXPECT_LT((a - e).norm(), 1e-10);
      }
    }
  }
}

TEST(Forward, SafeStartReproducesBaseline) {
  const auto env = small_environment();
  ModelConfig c = tiny_config();
  c.head_widths = {256, 128, 64, 3};
  TdoaTransformer model(c, env.extent, 4);
  const auto data = prepare_dataset(small_dataset(env, 40, 2), env, c);
  for (const auto& s : data.samples) EXPECT_EQ(predict(s, model), s.p_tdoa);
}

TEST(Forward, SpatialEncodingIsPermutationInvariant) {
  const auto env = small_environment();
  std::mt19937_64 rng(31);
  for (Ordering ordering : {Ordering::kFixed, Ordering::kTimeBased}) {
    const ModelConfig c = tiny_config(EncodingKind::kSpatialTime, ordering);
    TdoaTransformer model(c, env.extent, 2);
    randomize(model, 12);
    const auto sample = small_dataset(env, 1, 3, 0.0).front();
    const auto tensor = build_input_tensor(sample, env, ordering, c.zero_pad());
    const Vector3d p(5, 5, 0.3);
    const Vector3d ref = forward_tensor(tensor, p, model);
    std::vector<int> perm(static_cast<std::size_t>(tensor.n_rows()));
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 20; ++trial) {
      std::shuffle(perm.begin(), perm.end(), rng);
      EXPECT_LT((forward_tensor(permute_rows(tensor, perm), p, model) - ref).norm(), 1e-9);
    }
  }
}

TEST(Forward, LearnedEncodingSeesOrder) {
  const auto env = small_environment();
  const ModelConfig c = tiny_config(EncodingKind::kLearned);
  TdoaTransformer model(c, env.extent, 2);
  randomize(model, 12);
  const auto sample = small_dataset(env, 1, 3, 0.0).front();
  const auto tensor = build_input_tensor(sample, env, Ordering::kFixed);
  const Vector3d p(5, 5, 0.3);
  const std::vector<int> perm = {4, 3, 2, 1, 0};
  EXPECT_GT((forward_tensor(permute_rows(tensor, perm), p, model) - forward_tensor(tensor, p, model)).norm(), 1e-6);
}

TEST(Forward, EncoderPreservesShapeForSweepConfigs) {
  const auto env = default_environment();
  const auto sample = generate_dataset(env, {Vector3d(2, 1, 0.3)}, 0.5, 1).front();
  const auto est = baseline_estimate(sample, env);
  ASSERT_TRUE(est.has_value());
  struct Case {
    PatchStrategy strategy;
    std::vector<int> l;
    std::vector<int> d;
    std::vector<EncodingKind> kinds;
  };
  const std::vector<Case> cases = {
      {PatchStrategy::kMultiCir, {1, 3, 5, 6, 10, 15, 30, 50, 75}, {8, 16, 32, 64, 128, 256}, {EncodingKind::kLearned}},
      {PatchStrategy::kPerCir,
       {6, 15, 30, 50, 75, 150},
       {32, 64, 128, 256},
       {EncodingKind::kLearned, EncodingKind::kSpatial, EncodingKind::kSpatialTime}}};
  int checked = 0;
  for (const auto& cs : cases) {
    for (int l : cs.l) {
      for (int d : {cs.d.front(), cs.d.back()}) {
        for (EncodingKind kind : cs.kinds) {
          for (Ordering ordering : {Ordering::kFixed, Ordering::kTimeBased}) {
            ModelConfig c;
            c.patch = {cs.strategy, l};
            c.encoding.kind = kind;
            c.ordering = ordering;
            c.d_model = d;
            c.n_layers = 1;
            TdoaTransformer model(c, env.extent, 1);
            const auto s = prepare(build_input_tensor(sample, env, ordering, c.zero_pad()), est->position,
                                   sample.true_position, c, env.extent);
            const MatrixXd x = MatrixXd::Random(static_cast<Eigen::Index>(s.meta.size()), d);
            const MatrixXd out = encoder_forward(x, model, false);
            EXPECT_EQ(out.rows(), x.rows());
            EXPECT_EQ(out.cols(), x.cols());
            EXPECT_EQ(predict(s, model), est->position);
            ++checked;
          }
        }
      }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Schedule, WarmupThenLinearDecay) {
  TrainConfig cfg;
  const long total = 10000;
  EXPECT_DOUBLE_EQ(learning_rate(0, total, cfg), 0.0);
  EXPECT_NEAR(learning_rate(500, total, cfg), 1e-3, 1e-15);
  EXPECT_NEAR(learning_rate(250, total, cfg), 0.5e-3, 1e-15);
  EXPECT_NEAR(learning_rate(total, total, cfg), 0.0, 1e-15);
  EXPECT_LT(learning_rate(total - 1, total, cfg), 1e-6);
  double prev = learning_rate(500, total, cfg);
  for (long s = 600; s <= total; s += 100) {
    const double lr = learning_rate(s, total, cfg);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(Train, RejectsEmptyDataset) {
  try {
    train({}, tiny_config(), Vector3d(12, 8, 3), TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Train, SmokeRunCutsTrainingLossTenfold) {
  const auto env = small_environment();
  ModelConfig c = tiny_config(EncodingKind::kSpatial, Ordering::kTimeBased, PatchStrategy::kPerCir, 150);
  c.d_model = 16;
  c.n_heads = 2;
  c.d_ff = 64;
  c.head_widths = {64, 32, 3};
  c.dropout = 0.0;
  const auto data = prepare_dataset(small_dataset(env, 220, 14, 0.0), env, c);
  ASSERT_GE(data.samples.size(), 200u);
  const std::vector<PreparedSample> subset(data.samples.begin(), data.samples.begin() + 200);
  TrainConfig t;
  t.max_epochs = 150;
  t.early_stop_patience = 1000;
  t.batch_size = 16;
  t.lr_peak = 3e-3;
  const auto trained = train(subset, c, env.extent, t);
  ASSERT_EQ(trained.history.size(), 151u);
  const double first = trained.history.front().train_loss;
  double best = first;
  for (const auto& r : trained.history) best = std::min(best, r.train_loss);
  EXPECT_LT(best, first / 10.0) << "epoch 0 " << first << ", best " << best;
}

TEST(Train, SameSeedSameParameters) {
  const auto env = small_environment();
  const ModelConfig c = tiny_config();
  const auto data = prepare_dataset(small_dataset(env, 40, 5), env, c);
  TrainConfig t;
  t.max_epochs = 3;
  t.batch_size = 8;
  const auto a = train(data.samples, c, env.extent, t);
  const auto b = train(data.samples, c, env.extent, t);
  std::vector<MatrixXd> pa;
  a.model.for_each_parameter([&](const std::string&, const Param& p) { pa.push_back(p.value); });
  std::size_t k = 0;
  b.model.for_each_parameter([&](const std::string& name, const Param& p) { EXPECT_EQ(p.value, pa[k++]) << name; });
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) EXPECT_EQ(a.history[e].val_loss, b.history[e].val_loss);
  EXPECT_EQ(a.history.front().lr, 0.0);
}

}  // namespace
}  // namespace uwbtc
