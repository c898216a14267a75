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

#include "uwbtc/patching.hpp"

namespace uwbtc {
namespace {

void check_l_patch(int l_patch) {
  if (l_patch <= 0 || kWindowLength % l_patch != 0) {
    fail(ErrorCode::kInvalidConfig,
         "l_patch " + std::to_string(l_patch) + " does not divide " + std::to_string(kWindowLength));
  }
}

}  // namespace

void PatchConfig::validate() const { check_l_patch(l_patch); }

Patches patch_multi_cir(const InputTensor& m, int l_patch) {
  check_l_patch(l_patch);
  if (!m.padded || m.n_rows() != m.n_total) {
    fail(ErrorCode::kIncompatibleOrdering,
         "multi-CIR patching needs all n_total rows; unpadded time-based tensors are not supported");
  }
  const int k_count = kWindowLength / l_patch;
  const Eigen::Index rows = m.values.rows();
  Patches out;
  out.patches_per_cir = k_count;
  out.values.resize(k_count, rows * l_patch);
  for (int k = 0; k < k_count; ++k) {
    // Row-major flatten of the (rows x l_patch) block.
    for (Eigen::Index r = 0; r < rows; ++r) {
      out.values.row(k).segment(r * l_patch, l_patch) = m.values.row(r).segment(k * l_patch, l_patch);
    }
    TokenMeta meta;
    meta.present = true;
    meta.within_index = k;
    out.meta.push_back(meta);
  }
  return out;
}

Patches patch_per_cir(const InputTensor& m, int l_patch) {
  check_l_patch(l_patch);
  const int k_count = kWindowLength / l_patch;
  const int n_rows = m.n_rows();
  Patches out;
  out.patches_per_cir = k_count;
  out.values.resize(static_cast<Eigen::Index>(n_rows) * k_count, l_patch);
  for (int k = 0; k < n_rows * k_count; ++k) {
    const int i = k / k_count;
    const int j = k % k_count;
    out.values.row(k) = m.values.row(i).segment(j * l_patch, l_patch);
    const TensorRow& row = m.rows[static_cast<std::size_t>(i)];
    TokenMeta meta;
    meta.has_anchor = true;
    meta.present = row.present;
    meta.anchor_position = row.anchor_position;
    meta.rx_time = row.rx_time;
    meta.row = i;
    meta.within_index = j;
    out.meta.push_back(meta);
  }
  return out;
}

Patches make_patches(const InputTensor& m, const PatchConfig& config) {
  return config.strategy == PatchStrategy::kMultiCir ? patch_multi_cir(m, config.l_patch)
                                                     : patch_per_cir(m, config.l_patch);
}

TokenSequence embed_patches(const Patches& patches, const Eigen::MatrixXd& weight,
                            const Eigen::VectorXd& bias, const Eigen::RowVectorXd& cls) {
  if (weight.cols() != patches.values.cols() || weight.rows() != bias.size() ||
      weight.rows() != cls.size()) {
    fail(ErrorCode::kShape, "embedding weight " + std::to_string(weight.rows()) + "x" +
                                std::to_string(weight.cols()) + " does not match patch size " +
                                std::to_string(patches.values.cols()));
  }
  TokenSequence seq;
  seq.patches_per_cir = patches.patches_per_cir;
  seq.tokens.resize(patches.values.rows() + 1, weight.rows());
  seq.tokens.row(0) = cls;
  seq.tokens.bottomRows(patches.values.rows()) =
      (patches.values * weight.transpose()).rowwise() + bias.transpose();
  TokenMeta cls_meta;
  cls_meta.is_cls = true;
  seq.meta.push_back(cls_meta);
  seq.meta.insert(seq.meta.end(), patches.meta.begin(), patches.meta.end());
  return seq;
}

}  // namespace uwbtc
