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

#ifndef UWBTC_PIPELINE_HPP
#define UWBTC_PIPELINE_HPP

#include <optional>
#include <vector>

#include "uwbtc/channel_sim.hpp"
#include "uwbtc/tdoa.hpp"
#include "uwbtc/transformer.hpp"

namespace uwbtc {

/// How the uncorrected TDoA position is computed from a Sample.
struct BaselineConfig {
  PairPolicy policy = PairPolicy::kReferenceAnchor;
  /// Solve (x, y) with z fixed to `tag_height`.
  bool planar = true;
  double tag_height = 0.3;
  /// Project the solution into [0, extent]; ill-conditioned few-anchor
  /// geometries otherwise diverge far outside the building.
  bool clamp_to_extent = true;
};

/// Baseline position, or nullopt when fewer than 3 anchors received the packet.
std::optional<PositionEstimate> baseline_estimate(const Sample& sample, const Environment& env,
                                                  const BaselineConfig& config = {});

struct PreparedDataset {
  std::vector<PreparedSample> samples;
  std::vector<int> sample_ids;
  /// Samples skipped because the baseline was not computable.
  std::vector<int> unsolvable_ids;
};

PreparedDataset prepare_dataset(const std::vector<Sample>& samples, const Environment& env,
                                const ModelConfig& model_config, const BaselineConfig& baseline = {});

/// End-to-end correction: tensor, patches, encodings, encoder, head. The TDoA
/// estimate is computed unless supplied.
Vector3d forward(const Sample& sample, const Environment& env, const TdoaTransformer& model,
                 const std::optional<Vector3d>& p_tdoa = std::nullopt, const BaselineConfig& baseline = {});

}  // namespace uwbtc

#endif  // UWBTC_PIPELINE_HPP
