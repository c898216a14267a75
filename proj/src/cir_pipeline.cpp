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

#include "uwbtc/cir_pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace uwbtc {

int InputTensor::n_present() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const TensorRow& r) { return r.present; }));
}

Eigen::ArrayXd iq_to_amplitude(const RawCir& raw) {
  Eigen::ArrayXd amplitude(static_cast<Eigen::Index>(raw.iq.size()));
  for (std::size_t k = 0; k < raw.iq.size(); ++k) {
    amplitude(static_cast<Eigen::Index>(k)) = std::abs(raw.iq[k]);
  }
  return amplitude;
}

CirWindow trim_window(const Eigen::ArrayXd& amplitude, int first_path_index) {
  CirWindow out = CirWindow::Zero();
  const Eigen::Index start = static_cast<Eigen::Index>(first_path_index) - kSamplesBeforeFirstPath;
  const Eigen::Index lo = std::max<Eigen::Index>(start, 0);
  const Eigen::Index hi = std::min<Eigen::Index>(start + kWindowLength, amplitude.size());
  if (hi > lo) out.segment(lo - start, hi - lo) = amplitude.segment(lo, hi - lo);
  return out;
}

CirWindow normalize_minmax(const CirWindow& window) {
  const double lo = window.minCoeff();
  const double hi = window.maxCoeff();
  if (!(hi > lo)) return CirWindow::Zero();
  return (window - lo) / (hi - lo);
}

CirWindow process_cir(const RawCir& raw) {
  return normalize_minmax(trim_window(iq_to_amplitude(raw), raw.first_path_index));
}

InputTensor build_input_tensor(const Sample& sample, const Environment& env, Ordering ordering,
                               bool zero_pad) {
  if (sample.raw_cirs.empty()) fail(ErrorCode::kInsufficientData, "sample has no CIRs");

  std::unordered_map<int, std::size_t> row_of_anchor;
  for (std::size_t n = 0; n < env.anchors.size(); ++n) row_of_anchor.emplace(env.anchors[n].id, n);

  struct Entry {
    std::size_t env_row;
    const RawCir* cir;
  };
  std::vector<Entry> received;
  for (const auto& cir : sample.raw_cirs) {
    auto it = row_of_anchor.find(cir.anchor_id);
    if (it == row_of_anchor.end()) {
      fail(ErrorCode::kMissingAnchor, "CIR from unknown anchor " + std::to_string(cir.anchor_id));
    }
    received.push_back({it->second, &cir});
  }

  InputTensor tensor;
  tensor.ordering = ordering;
  tensor.n_total = static_cast<int>(env.anchors.size());

  auto absent_row = [&](std::size_t env_row) {
    return TensorRow{false, env.anchors[env_row].id, env.anchors[env_row].position, 0.0};
  };
  auto present_row = [&](const Entry& e) {
    return TensorRow{true, e.cir->anchor_id, env.anchors[e.env_row].position, e.cir->rx_time};
  };

  std::vector<const RawCir*> row_cirs;
  if (ordering == Ordering::kFixed) {
    tensor.padded = true;
    row_cirs.assign(env.anchors.size(), nullptr);
    for (std::size_t n = 0; n < env.anchors.size(); ++n) tensor.rows.push_back(absent_row(n));
    for (const auto& e : received) {
      tensor.rows[e.env_row] = present_row(e);
      row_cirs[e.env_row] = e.cir;
    }
  } else {
    std::stable_sort(received.begin(), received.end(), [](const Entry& a, const Entry& b) {
      if (a.cir->rx_time != b.cir->rx_time) return a.cir->rx_time < b.cir->rx_time;
      return a.cir->anchor_id < b.cir->anchor_id;
    });
    std::vector<bool> seen(env.anchors.size(), false);
    for (const auto& e : received) {
      tensor.rows.push_back(present_row(e));
      row_cirs.push_back(e.cir);
      seen[e.env_row] = true;
    }
    if (zero_pad) {
      tensor.padded = true;
      std::vector<std::size_t> missing;
      for (std::size_t n = 0; n < env.anchors.size(); ++n) {
        if (!seen[n]) missing.push_back(n);
      }
      std::sort(missing.begin(), missing.end(), [&](std::size_t a, std::size_t b) {
        return env.anchors[a].id < env.anchors[b].id;
      });
      for (std::size_t n : missing) {
        tensor.rows.push_back(absent_row(n));
        row_cirs.push_back(nullptr);
      }
    }
  }

  tensor.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tensor.rows.size()), kWindowLength);
  for (std::size_t r = 0; r < row_cirs.size(); ++r) {
    if (row_cirs[r] != nullptr) {
      tensor.values.row(static_cast<Eigen::Index>(r)) = process_cir(*row_cirs[r]).matrix().transpose();
    }
  }
  return tensor;
}

InputTensor permute_rows(const InputTensor& tensor, const std::vector<int>& perm) {
  if (perm.size() != tensor.rows.size()) fail(ErrorCode::kShape, "permutation size mismatch");
  InputTensor out = tensor;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const int src = perm[k];
    if (src < 0 || src >= tensor.n_rows()) fail(ErrorCode::kInvalidIndex, "permutation index out of range");
    if (seen[static_cast<std::size_t>(src)]) fail(ErrorCode::kInvalidArgument, "permutation repeats a row");
    seen[static_cast<std::size_t>(src)] = true;
    out.values.row(static_cast<Eigen::Index>(k)) = tensor.values.row(src);
    out.rows[k] = tensor.rows[static_cast<std::size_t>(src)];
  }
  return out;
}

}  // namespace uwbtc
