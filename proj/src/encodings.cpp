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

#include "uwbtc/encodings.hpp"

#include <algorithm>
#include <limits>

namespace uwbtc {
namespace {

void write_bands(double coordinate, const Eigen::VectorXd& omega, Eigen::RowVectorXd& out,
                 Eigen::Index offset) {
  for (Eigen::Index f = 0; f < omega.size(); ++f) {
    out(offset + 2 * f) = std::sin(coordinate * omega(f));
    out(offset + 2 * f + 1) = std::cos(coordinate * omega(f));
  }
}

}  // namespace

void EncodingConfig::validate() const {
  if (d_model < 1) fail(ErrorCode::kInvalidConfig, "d_model must be positive");
  if (spatial() && f_bands() < 1) {
    fail(ErrorCode::kInvalidConfig, "spatial encodings need d_model >= 6");
  }
  if (!(omega_min > 0.0) || !(omega_min < omega_max)) {
    fail(ErrorCode::kInvalidConfig, "need 0 < omega_min < omega_max");
  }
  if (!(dt_max > 0.0)) fail(ErrorCode::kInvalidConfig, "dt_max must be positive");
}

Eigen::RowVectorXd spatial_pe(const Vector3d& anchor_position, const Vector3d& extent,
                              const EncodingConfig& config) {
  if ((extent.array() <= 0.0).any()) fail(ErrorCode::kInvalidConfig, "extent must be positive");
  Vector3d p = anchor_position;
  if (config.clamp) {
    p = p.cwiseMax(Vector3d::Zero()).cwiseMin(extent);
  } else if (!((p.array() >= 0.0).all() && (p.array() <= extent.array()).all())) {
    fail(ErrorCode::kOutOfBounds, "anchor position outside environment extent");
  }
  const int f_bands = config.f_bands();
  const Eigen::VectorXd omega = frequency_bands(f_bands, config.omega_min, config.omega_max);
  const Vector3d normalized = p.cwiseQuotient(extent);

  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(config.d_model);
  for (int axis = 0; axis < 3; ++axis) write_bands(normalized(axis), omega, out, 2 * f_bands * axis);
  return out;
}

Eigen::RowVectorXd time_diff_pe(double delta_t, const EncodingConfig& config) {
  const double normalized = std::clamp(delta_t / config.dt_max, 0.0, 1.0);
  const Eigen::VectorXd omega = frequency_bands(config.f_bands(), config.omega_min, config.omega_max);
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(config.d_model);
  write_bands(normalized, omega, out, 0);
  return out;
}

Eigen::RowVectorXd learned_pe(int seq_index, const Eigen::MatrixXd& table) {
  if (seq_index < 0 || seq_index >= table.rows()) {
    fail(ErrorCode::kInvalidIndex, "sequence index " + std::to_string(seq_index) +
                                       " outside learned table of " + std::to_string(table.rows()));
  }
  return table.row(seq_index);
}

Eigen::MatrixXd encoding_matrix(const TokenSequence& tokens, const EncodingConfig& config,
                                const Vector3d& extent, const EncodingTables& tables) {
  const Eigen::Index n = tokens.tokens.rows();
  if (tokens.tokens.cols() != config.d_model) fail(ErrorCode::kShape, "token width != d_model");
  Eigen::MatrixXd enc = Eigen::MatrixXd::Zero(n, config.d_model);

  if (config.kind == EncodingKind::kLearned) {
    for (Eigen::Index t = 0; t < n; ++t) enc.row(t) = learned_pe(static_cast<int>(t), tables.sequence);
    return enc;
  }

  for (std::size_t t = 1; t < tokens.meta.size(); ++t) {
    if (!tokens.meta[t].has_anchor) {
      fail(ErrorCode::kIncompatibleEncoding,
           "spatial encodings need per-CIR tokens; multi-CIR tokens carry no single anchor");
    }
  }
  if (tables.cls.size() != config.d_model) fail(ErrorCode::kShape, "CLS encoding width != d_model");

  double t_first = std::numeric_limits<double>::infinity();
  for (const auto& meta : tokens.meta) {
    if (meta.has_anchor && meta.present) t_first = std::min(t_first, meta.rx_time);
  }

  enc.row(0) = tables.cls;
  for (Eigen::Index t = 1; t < n; ++t) {
    const TokenMeta& meta = tokens.meta[static_cast<std::size_t>(t)];
    enc.row(t) = spatial_pe(meta.anchor_position, extent, config) +
                 learned_pe(meta.within_index, tables.within_cir);
    // Absent rows have no reception time, so they get no time term.
    if (config.kind == EncodingKind::kSpatialTime && meta.present) {
      enc.row(t) += time_diff_pe(meta.rx_time - t_first, config);
    }
  }
  return enc;
}

TokenSequence apply_encodings(const TokenSequence& tokens, const EncodingConfig& config,
                              const Vector3d& extent, const EncodingTables& tables) {
  TokenSequence out = tokens;
  out.tokens += encoding_matrix(tokens, config, extent, tables);
  return out;
}

}  // namespace uwbtc
