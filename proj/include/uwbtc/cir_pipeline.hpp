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

#ifndef UWBTC_CIR_PIPELINE_HPP
#define UWBTC_CIR_PIPELINE_HPP

#include <vector>

#include <Eigen/Dense>

#include "uwbtc/channel_sim.hpp"

namespace uwbtc {

inline constexpr int kWindowLength = 150;
inline constexpr int kSamplesBeforeFirstPath = 50;

using CirWindow = Eigen::Array<double, kWindowLength, 1>;

enum class Ordering {
  kFixed,      // one row per environment anchor, absent anchors zero-filled
  kTimeBased,  // earliest reception first, ties by anchor id
};

/// Per-row metadata. Absent rows (zero-filled) still carry their anchor identity.
struct TensorRow {
  bool present = false;
  int anchor_id = 0;
  Vector3d anchor_position = Vector3d::Zero();
  double rx_time = 0.0;
};

/// The (N, 150) matrix of normalized CIR amplitudes with one metadata entry per row.
struct InputTensor {
  Eigen::MatrixXd values;
  std::vector<TensorRow> rows;
  Ordering ordering = Ordering::kFixed;
  int n_total = 0;
  /// True when the tensor holds n_total rows (fixed, or time-based with trailing zero rows).
  bool padded = false;

  [[nodiscard]] int n_rows() const { return static_cast<int>(values.rows()); }
  [[nodiscard]] int n_present() const;
};

/// Elementwise magnitude of the IQ samples.
Eigen::ArrayXd iq_to_amplitude(const RawCir& raw);

/// 50 samples before and 100 from the first path; out-of-range positions read zero.
CirWindow trim_window(const Eigen::ArrayXd& amplitude, int first_path_index);

/// (x - min) / (max - min); a constant window maps to all zeros.
CirWindow normalize_minmax(const CirWindow& window);

/// Full per-CIR chain: amplitude, trim, normalize.
CirWindow process_cir(const RawCir& raw);

/// Orders processed CIRs into M. `zero_pad` appends absent anchors (ascending id)
/// as zero rows after the time-sorted ones; it is implied for fixed ordering.
InputTensor build_input_tensor(const Sample& sample, const Environment& env, Ordering ordering,
                               bool zero_pad = false);

/// Applies `perm` to the rows: row k of the result is row perm[k] of `tensor`.
InputTensor permute_rows(const InputTensor& tensor, const std::vector<int>& perm);

}  // namespace uwbtc

#endif  // UWBTC_CIR_PIPELINE_HPP
