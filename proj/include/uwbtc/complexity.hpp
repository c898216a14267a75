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

#ifndef UWBTC_COMPLEXITY_HPP
#define UWBTC_COMPLEXITY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uwbtc/transformer.hpp"

namespace uwbtc {

/// Multiply-accumulate counts for one forward pass. Fractional when the
/// available-anchor count is an average.
struct OperationCount {
  double embedding_ops = 0.0;
  double attention_ops = 0.0;    // per layer
  double feedforward_ops = 0.0;  // per layer
  double head_ops = 0.0;
  double total_ops = 0.0;
  double n_tokens = 0.0;  // including CLS
};

/// Unit-constant instantiation of the per-architecture growth terms:
/// embedding = tokens * patch_size * d, attention = n^2 * d, feed-forward = n * d * d_ff,
/// with n counting the CLS token. Per-CIR fixed ordering uses n_total rows,
/// per-CIR time ordering uses n_av; multi-CIR always spans n_total rows.
OperationCount op_count(const ModelConfig& config, double n_total, double n_av);

/// MACs per forward pass of the pairwise CNN DDoA corrector.
inline constexpr std::uint64_t kCnnOpsPerPair = 173704;

inline std::uint64_t cnn_baseline_ops(std::uint64_t n_available_pairs) {
  return kCnnOpsPerPair * n_available_pairs;
}

struct SweepResult {
  ModelConfig config;
  double total_ops = 0.0;
  double mae = 0.0;
  std::map<int, double> cep;
  std::string status = "ok";
};

/// Results not dominated in (total_ops, mae), sorted by ascending ops.
/// Rows whose status is not "ok" are ignored.
std::vector<SweepResult> pareto_front(const std::vector<SweepResult>& results);

}  // namespace uwbtc

#endif  // UWBTC_COMPLEXITY_HPP
