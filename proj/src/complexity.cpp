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

#include "uwbtc/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uwbtc {

OperationCount op_count(const ModelConfig& config, double n_total, double n_av) {
  config.validate();
  if (!(n_total > 0.0) || !(n_av > 0.0) || n_av > n_total) {
    fail(ErrorCode::kInvalidConfig, "need 0 < n_av <= n_total");
  }
  const double d = config.d_model;
  const double k = config.patch.patches_per_cir();
  const double l = config.patch.l_patch;

  double n_patches = 0.0;
  double patch_size = 0.0;
  if (config.patch.strategy == PatchStrategy::kMultiCir) {
    n_patches = k;
    patch_size = n_total * l;
  } else {
    const double rows = config.ordering == Ordering::kFixed ? n_total : n_av;
    n_patches = rows * k;
    patch_size = l;
  }

  OperationCount ops;
  ops.n_tokens = n_patches + 1.0;
  ops.embedding_ops = n_patches * patch_size * d;
  ops.attention_ops = ops.n_tokens * ops.n_tokens * d;
  ops.feedforward_ops = ops.n_tokens * d * config.d_ff;
  double in = d + 3.0;
  for (int width : config.head_widths) {
    ops.head_ops += in * width;
    in = width;
  }
  ops.total_ops = ops.embedding_ops + config.n_layers * (ops.attention_ops + ops.feedforward_ops) + ops.head_ops;
  return ops;
}

std::vector<SweepResult> pareto_front(const std::vector<SweepResult>& results) {
  std::vector<const SweepResult*> ok;
  for (const auto& r : results) {
    if (r.status == "ok" && std::isfinite(r.mae) && std::isfinite(r.total_ops)) ok.push_back(&r);
  }
  std::stable_sort(ok.begin(), ok.end(), [](const SweepResult* a, const SweepResult* b) {
    if (a->total_ops != b->total_ops) return a->total_ops < b->total_ops;
    return a->mae < b->mae;
  });

  std::vector<SweepResult> front;
  double best_cheaper = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < ok.size();) {
    std::size_t stop = start;
    while (stop < ok.size() && ok[stop]->total_ops == ok[start]->total_ops) ++stop;
    // Within a group of equal cost only the minimum-MAE entries survive, and only
    // if they beat everything cheaper.
    const double group_best = ok[start]->mae;
    if (group_best < best_cheaper) {
      for (std::size_t k = start; k < stop && ok[k]->mae == group_best; ++k) front.push_back(*ok[k]);
    }
    best_cheaper = std::min(best_cheaper, group_best);
    start = stop;
  }
  return front;
}

}  // namespace uwbtc
