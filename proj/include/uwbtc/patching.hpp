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

#ifndef UWBTC_PATCHING_HPP
#define UWBTC_PATCHING_HPP

#include <vector>

#include <Eigen/Dense>

#include "uwbtc/cir_pipeline.hpp"

namespace uwbtc {

enum class PatchStrategy {
  kMultiCir,  // each patch spans the same time slice of every row
  kPerCir,    // each patch comes from a single row
};

struct PatchConfig {
  PatchStrategy strategy = PatchStrategy::kPerCir;
  int l_patch = 150;

  /// K = 150 / l_patch.
  [[nodiscard]] int patches_per_cir() const { return kWindowLength / l_patch; }
  /// Throws invalid-config unless l_patch divides 150.
  void validate() const;
  /// Flattened patch length fed to the embedding.
  [[nodiscard]] int patch_size(int n_total) const {
    return strategy == PatchStrategy::kMultiCir ? n_total * l_patch : l_patch;
  }
};

/// Where a token came from. CLS and multi-CIR tokens carry no anchor.
struct TokenMeta {
  bool is_cls = false;
  bool has_anchor = false;
  bool present = false;
  Vector3d anchor_position = Vector3d::Zero();
  double rx_time = 0.0;
  int row = -1;          // i
  int within_index = 0;  // j
};

/// One flattened patch per matrix row.
struct Patches {
  Eigen::MatrixXd values;
  std::vector<TokenMeta> meta;
  int patches_per_cir = 1;
};

/// Token matrix (n_tokens x d_model) with the CLS token in row 0.
struct TokenSequence {
  Eigen::MatrixXd tokens;
  std::vector<TokenMeta> meta;
  int patches_per_cir = 1;

  [[nodiscard]] int n_tokens() const { return static_cast<int>(tokens.rows()); }
};

/// K patches of n_total * l_patch values, columns [k*l, (k+1)*l) of every row, row-major.
Patches patch_multi_cir(const InputTensor& m, int l_patch);

/// N*K patches; patch k is row k / K, columns [j*l, (j+1)*l) with j = k mod K.
Patches patch_per_cir(const InputTensor& m, int l_patch);

Patches make_patches(const InputTensor& m, const PatchConfig& config);

/// token_k = W * patch_k + b, with `cls` prepended.
TokenSequence embed_patches(const Patches& patches, const Eigen::MatrixXd& weight,
                            const Eigen::VectorXd& bias, const Eigen::RowVectorXd& cls);

}  // namespace uwbtc

#endif  // UWBTC_PATCHING_HPP
