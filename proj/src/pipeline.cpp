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

#include "uwbtc/pipeline.hpp"

#include <map>

#include "uwbtc/cir_pipeline.hpp"

namespace uwbtc {

std::optional<PositionEstimate> baseline_estimate(const Sample& sample, const Environment& env,
                                                  const BaselineConfig& config) {
  if (sample.raw_cirs.size() < 3) return std::nullopt;
  std::map<int, double> timestamps;
  for (const auto& cir : sample.raw_cirs) timestamps[cir.anchor_id] = cir.rx_time;
  SolverOptions options;
  options.planar = config.planar;
  options.fixed_z = config.tag_height;
  auto estimate = solve_tdoa(measured_ddoa_set(timestamps, config.policy), env.anchors, std::nullopt, options);
  if (config.clamp_to_extent) {
    estimate.position = estimate.position.cwiseMax(Vector3d::Zero()).cwiseMin(env.extent);
  }
  return estimate;
}

PreparedDataset prepare_dataset(const std::vector<Sample>& samples, const Environment& env,
                                const ModelConfig& model_config, const BaselineConfig& baseline) {
  model_config.validate();
  PreparedDataset out;
  out.samples.reserve(samples.size());
  for (const auto& sample : samples) {
    const auto estimate = baseline_estimate(sample, env, baseline);
    if (!estimate) {
      out.unsolvable_ids.push_back(sample.sample_id);
      continue;
    }
    const InputTensor tensor =
        build_input_tensor(sample, env, model_config.ordering, model_config.zero_pad());
    out.samples.push_back(
        prepare(tensor, estimate->position, sample.true_position, model_config, env.extent));
    out.sample_ids.push_back(sample.sample_id);
  }
  return out;
}

Vector3d forward(const Sample& sample, const Environment& env, const TdoaTransformer& model,
                 const std::optional<Vector3d>& p_tdoa, const BaselineConfig& baseline) {
  Vector3d start;
  if (p_tdoa) {
    start = *p_tdoa;
  } else {
    const auto estimate = baseline_estimate(sample, env, baseline);
    if (!estimate) fail(ErrorCode::kInsufficientAnchors, "baseline needs at least 3 receiving anchors");
    start = estimate->position;
  }
  const InputTensor tensor = build_input_tensor(sample, env, model.config.ordering, model.config.zero_pad());
  return forward_tensor(tensor, start, model);
}

}  // namespace uwbtc
