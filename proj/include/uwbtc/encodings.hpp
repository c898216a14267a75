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

#ifndef UWBTC_ENCODINGS_HPP
#define UWBTC_ENCODINGS_HPP

#include <cmath>

#include <Eigen/Dense>

#include "uwbtc/patching.hpp"

namespace uwbtc {

enum class EncodingKind {
  kLearned,      // trainable table indexed by sequence position
  kSpatial,      // sinusoidal anchor coordinates + learned within-CIR rows
  kSpatialTime,  // spatial plus sinusoidal reception-time offset
};

struct EncodingConfig {
  EncodingKind kind = EncodingKind::kSpatial;
  int d_model = 64;
  double omega_min = 1.0;
  double omega_max = 1000.0;
  double dt_max = 200e-9;  // seconds
  /// Clamp anchor coordinates into the extent instead of throwing.
  bool clamp = false;

  /// Largest F with 6F <= d_model.
  [[nodiscard]] int f_bands() const { return d_model / 6; }
  [[nodiscard]] bool spatial() const { return kind != EncodingKind::kLearned; }
  void validate() const;
};

/// omega_f = omega_min * (omega_max / omega_min)^(f / (F - 1)); F = 1 yields omega_min.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> frequency_bands(int f_bands, Scalar omega_min, Scalar omega_max) {
  if (!(omega_min > Scalar(0)) || !(omega_min < omega_max) || f_bands < 1) {
    fail(ErrorCode::kInvalidConfig, "frequency bands need F >= 1 and 0 < omega_min < omega_max");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> omega(f_bands);
  const Scalar ratio = omega_max / omega_min;
  for (int f = 0; f < f_bands; ++f) {
    omega(f) = f_bands == 1 ? omega_min
                            : omega_min * std::pow(ratio, Scalar(f) / Scalar(f_bands - 1));
  }
  return omega;
}

/// [sin(x' w_f), cos(x' w_f)]_f for x', then y', then z'; right-padded with zeros to d_model.
Eigen::RowVectorXd spatial_pe(const Vector3d& anchor_position, const Vector3d& extent,
                              const EncodingConfig& config);

/// Same band construction over the single coordinate dt / dt_max (clamped to [0, 1]).
Eigen::RowVectorXd time_diff_pe(double delta_t, const EncodingConfig& config);

/// Row lookup; throws invalid-index past the table.
Eigen::RowVectorXd learned_pe(int seq_index, const Eigen::MatrixXd& table);

/// Learned parameter tables used by `apply_encodings`. Only the ones the kind
/// needs must be sized.
struct EncodingTables {
  Eigen::MatrixXd sequence;    // max_seq_len x d_model (learned kind)
  Eigen::MatrixXd within_cir;  // K x d_model (spatial kinds)
  Eigen::RowVectorXd cls;      // d_model (spatial kinds)
};

/// Additive encoding for every token of `tokens` (same shape as tokens.tokens).
Eigen::MatrixXd encoding_matrix(const TokenSequence& tokens, const EncodingConfig& config,
                                const Vector3d& extent, const EncodingTables& tables);

TokenSequence apply_encodings(const TokenSequence& tokens, const EncodingConfig& config,
                              const Vector3d& extent, const EncodingTables& tables);

}  // namespace uwbtc

#endif  // UWBTC_ENCODINGS_HPP
