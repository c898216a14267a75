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

#ifndef UWBTC_CHECKPOINT_HPP
#define UWBTC_CHECKPOINT_HPP

#include <filesystem>

#include <nlohmann/json.hpp>

#include "uwbtc/trainer.hpp"

namespace uwbtc {

inline constexpr int kCheckpointSchemaVersion = 1;

/// JSON document: {format, schema_version, config, extent, best_epoch, history,
/// parameters: {name: {rows, cols, data (row-major)}}}.
nlohmann::json checkpoint_to_json(const TrainedModel& trained);
TrainedModel checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const TrainedModel& trained, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace uwbtc

#endif  // UWBTC_CHECKPOINT_HPP
