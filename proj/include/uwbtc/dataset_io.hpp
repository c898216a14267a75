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

#ifndef UWBTC_DATASET_IO_HPP
#define UWBTC_DATASET_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uwbtc/channel_sim.hpp"

namespace uwbtc {

// One Sample per line:
// {sample_id, true_position: [x, y, z], tx_time_s,
//  measurements: [{anchor_id, rx_time_s, first_path_index, cir_real: [...], cir_imag: [...],
//                  los?, timestamp_error_s?}]}
// The optional keys carry simulator ground truth.
nlohmann::json sample_to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);

void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& path);

/// Reads a dataset, choosing the parser by extension. Only ".jsonl" exists
/// today; other recording formats get their own branch here.
std::vector<Sample> read_dataset(const std::filesystem::path& path);

/// Anchor list from "id,x,y,z" CSV (header line optional) or a JSON array of
/// {id, x, y, z}.
AnchorList read_anchors(const std::filesystem::path& path);

struct DatasetStats {
  std::size_t n_samples = 0;
  double mean_anchors = 0.0;
  double los_fraction = 0.0;  // over received links
  std::size_t under_three_anchors = 0;
};

DatasetStats dataset_stats(const std::vector<Sample>& samples);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Minimal CSV writer; cells are written verbatim.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Parses a CSV with a header row into string cells. No quoting support.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::vector<std::string>* header);

/// Shortest round-trip decimal for a double.
std::string format_number(double v);

}  // namespace uwbtc

#endif  // UWBTC_DATASET_IO_HPP
