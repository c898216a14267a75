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

#include "uwbtc/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "uwbtc/serialization.hpp"

namespace uwbtc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

}  // namespace

nlohmann::json sample_to_json(const Sample& sample) {
  nlohmann::json measurements = nlohmann::json::array();
  for (const auto& cir : sample.raw_cirs) {
    std::vector<double> re(cir.iq.size());
    std::vector<double> im(cir.iq.size());
    for (std::size_t k = 0; k < cir.iq.size(); ++k) {
      re[k] = cir.iq[k].real();
      im[k] = cir.iq[k].imag();
    }
    measurements.push_back({{"anchor_id", cir.anchor_id},
                            {"rx_time_s", cir.rx_time},
                            {"first_path_index", cir.first_path_index},
                            {"cir_real", re},
                            {"cir_imag", im},
                            {"los", cir.los},
                            {"timestamp_error_s", cir.timestamp_error}});
  }
  return {{"sample_id", sample.sample_id},
          {"true_position", sample.true_position},
          {"tx_time_s", sample.tx_time},
          {"measurements", measurements}};
}

Sample sample_from_json(const nlohmann::json& j) {
  Sample sample;
  try {
    sample.sample_id = j.at("sample_id").get<int>();
    sample.true_position = j.at("true_position").get<Vector3d>();
    sample.tx_time = j.value("tx_time_s", 0.0);
    for (const auto& m : j.at("measurements")) {
      RawCir cir;
      cir.anchor_id = m.at("anchor_id").get<int>();
      cir.rx_time = m.at("rx_time_s").get<double>();
      cir.first_path_index = m.at("first_path_index").get<int>();
      const auto re = m.at("cir_real").get<std::vector<double>>();
      const auto im = m.at("cir_imag").get<std::vector<double>>();
      if (re.size() != im.size()) fail(ErrorCode::kInvalidArgument, "cir_real and cir_imag differ in length");
      cir.iq.resize(re.size());
      for (std::size_t k = 0; k < re.size(); ++k) cir.iq[k] = {re[k], im[k]};
      cir.los = m.value("los", true);
      cir.timestamp_error = m.value("timestamp_error_s", 0.0);
      sample.raw_cirs.push_back(std::move(cir));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, std::string("malformed sample: ") + e.what());
  }
  return sample;
}

void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
  if (path.extension() != ".jsonl") fail(ErrorCode::kIo, "unsupported dataset format: " + path.string());
  auto in = open_in(path);
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    samples.push_back(sample_from_json(j));
  }
  return samples;
}

AnchorList read_anchors(const std::filesystem::path& path) {
  if (path.extension() == ".json") return read_json(path).get<AnchorList>();
  auto in = open_in(path);
  AnchorList anchors;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != 4) fail(ErrorCode::kIo, "anchor line needs id,x,y,z: " + line);
    try {
      anchors.push_back({std::stoi(cells[0]), Vector3d(std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]))});
    } catch (const std::logic_error&) {
      if (anchors.empty()) continue;  // header
      fail(ErrorCode::kIo, "bad anchor line: " + line);
    }
  }
  return anchors;
}

DatasetStats dataset_stats(const std::vector<Sample>& samples) {
  DatasetStats stats;
  stats.n_samples = samples.size();
  std::size_t links = 0;
  std::size_t los = 0;
  for (const auto& s : samples) {
    links += s.raw_cirs.size();
    for (const auto& c : s.raw_cirs) los += c.los ? 1 : 0;
    if (s.raw_cirs.size() < 3) ++stats.under_three_anchors;
  }
  if (!samples.empty()) stats.mean_anchors = static_cast<double>(links) / static_cast<double>(samples.size());
  if (links > 0) stats.los_fraction = static_cast<double>(los) / static_cast<double>(links);
  return stats;
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  auto in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (first) {
      if (header) *header = std::move(cells);
      first = false;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace uwbtc
