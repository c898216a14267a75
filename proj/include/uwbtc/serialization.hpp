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

#ifndef UWBTC_SERIALIZATION_HPP
#define UWBTC_SERIALIZATION_HPP

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "uwbtc/channel_sim.hpp"
#include "uwbtc/pipeline.hpp"
#include "uwbtc/trainer.hpp"
#include "uwbtc/transformer.hpp"

// Positions serialize as [x, y, z]. Eigen types are outside ADL reach, hence
// the serializer specialization.
template <>
struct nlohmann::adl_serializer<uwbtc::Vector3d> {
  static void to_json(json& j, const uwbtc::Vector3d& v);
  static void from_json(const json& j, uwbtc::Vector3d& v);
};

namespace uwbtc {

std::string_view to_string(PatchStrategy v);
std::string_view to_string(Ordering v);
std::string_view to_string(EncodingKind v);
std::string_view to_string(PairPolicy v);
PatchStrategy parse_patch_strategy(std::string_view s);
Ordering parse_ordering(std::string_view s);
EncodingKind parse_encoding_kind(std::string_view s);
PairPolicy parse_pair_policy(std::string_view s);

// Missing keys keep their defaults when reading.
void to_json(nlohmann::json& j, const Anchor& a);
void from_json(const nlohmann::json& j, Anchor& a);
void to_json(nlohmann::json& j, const Box& b);
void from_json(const nlohmann::json& j, Box& b);
void to_json(nlohmann::json& j, const Environment& e);
void from_json(const nlohmann::json& j, Environment& e);
void to_json(nlohmann::json& j, const ChannelModel& m);
void from_json(const nlohmann::json& j, ChannelModel& m);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const BaselineConfig& c);
void from_json(const nlohmann::json& j, BaselineConfig& c);

}  // namespace uwbtc

#endif  // UWBTC_SERIALIZATION_HPP
