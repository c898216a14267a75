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

#include "uwbtc/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "uwbtc/serialization.hpp"

namespace uwbtc {

nlohmann::json checkpoint_to_json(const TrainedModel& trained) {
  const TdoaTransformer& model = trained.model;
  nlohmann::json params = nlohmann::json::object();
  model.for_each_parameter([&](const std::string& name, const Param& p) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) data.push_back(p.value(r, c));
    }
    params[name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", std::move(data)}};
  });
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : trained.history) {
    history.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}, {"lr", r.lr}});
  }
  return {{"format", "uwbtc-checkpoint"},
          {"schema_version", kCheckpointSchemaVersion},
          {"config", model.config},
          {"extent", model.extent},
          {"best_epoch", trained.best_epoch},
          {"history", std::move(history)},
          {"parameters", std::move(params)}};
}

TrainedModel checkpoint_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "uwbtc-checkpoint") fail(ErrorCode::kIo, "not a uwbtc checkpoint");
  const int version = doc.value("schema_version", 0);
  if (version != kCheckpointSchemaVersion) {
    fail(ErrorCode::kIo, "unsupported checkpoint schema version " + std::to_string(version));
  }
  TrainedModel trained;
  const auto config = doc.at("config").get<ModelConfig>();
  const auto extent = doc.at("extent").get<Vector3d>();
  trained.model = TdoaTransformer(config, extent, 0);
  trained.best_epoch = doc.value("best_epoch", 0);
  for (const auto& r : doc.value("history", nlohmann::json::array())) {
    auto number = [&r](const char* key) {
      return r.at(key).is_null() ? std::numeric_limits<double>::quiet_NaN() : r.at(key).get<double>();
    };
    trained.history.push_back({r.at("epoch").get<int>(), number("train_loss"), number("val_loss"), number("lr")});
  }

  const auto& params = doc.at("parameters");
  trained.model.for_each_parameter([&](const std::string& name, Param& p) {
    if (!params.contains(name)) fail(ErrorCode::kIo, "checkpoint missing parameter " + name);
    const auto& entry = params.at(name);
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto data = entry.at("data").get<std::vector<double>>();
    if (rows != p.value.rows() || cols != p.value.cols() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      fail(ErrorCode::kShape, "checkpoint parameter " + name + " has the wrong shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) p.value(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    if (!p.value.allFinite()) fail(ErrorCode::kNumericOverflow, "checkpoint parameter " + name + " not finite");
  });
  return trained;
}

void save_checkpoint(const TrainedModel& trained, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << checkpoint_to_json(trained).dump() << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, "malformed checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace uwbtc
