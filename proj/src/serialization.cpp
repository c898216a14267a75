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

#include "uwbtc/serialization.hpp"

namespace uwbtc {
namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<Enum, std::string_view> (&table)[N], const char* what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  fail(ErrorCode::kInvalidConfig, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::pair<PatchStrategy, std::string_view> kPatchNames[] = {
    {PatchStrategy::kMultiCir, "multi_cir"}, {PatchStrategy::kPerCir, "per_cir"}};
constexpr std::pair<Ordering, std::string_view> kOrderingNames[] = {
    {Ordering::kFixed, "fixed"}, {Ordering::kTimeBased, "time_based"}};
constexpr std::pair<EncodingKind, std::string_view> kEncodingNames[] = {
    {EncodingKind::kLearned, "learned"},
    {EncodingKind::kSpatial, "spatial"},
    {EncodingKind::kSpatialTime, "spatial_time"}};
constexpr std::pair<PairPolicy, std::string_view> kPolicyNames[] = {
    {PairPolicy::kAllPairs, "all_pairs"}, {PairPolicy::kReferenceAnchor, "reference_anchor"}};

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

}  // namespace

std::string_view to_string(PatchStrategy v) { return enum_name(v, kPatchNames); }
std::string_view to_string(Ordering v) { return enum_name(v, kOrderingNames); }
std::string_view to_string(EncodingKind v) { return enum_name(v, kEncodingNames); }
std::string_view to_string(PairPolicy v) { return enum_name(v, kPolicyNames); }
PatchStrategy parse_patch_strategy(std::string_view s) { return parse_enum(s, kPatchNames, "patching"); }
Ordering parse_ordering(std::string_view s) { return parse_enum(s, kOrderingNames, "ordering"); }
EncodingKind parse_encoding_kind(std::string_view s) { return parse_enum(s, kEncodingNames, "encoding"); }
PairPolicy parse_pair_policy(std::string_view s) { return parse_enum(s, kPolicyNames, "pair policy"); }

void to_json(nlohmann::json& j, const Anchor& a) {
  j = {{"id", a.id}, {"x", a.position.x()}, {"y", a.position.y()}, {"z", a.position.z()}};
}

void from_json(const nlohmann::json& j, Anchor& a) {
  a.id = j.at("id").get<int>();
  a.position = Vector3d(j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>());
}

void to_json(nlohmann::json& j, const Box& b) { j = {{"min", b.min}, {"max", b.max}}; }

void from_json(const nlohmann::json& j, Box& b) {
  j.at("min").get_to(b.min);
  j.at("max").get_to(b.max);
}

void to_json(nlohmann::json& j, const Environment& e) {
  j = {{"extent", e.extent}, {"anchors", e.anchors}, {"obstacles", e.obstacles}};
}

void from_json(const nlohmann::json& j, Environment& e) {
  read(j, "extent", e.extent);
  read(j, "anchors", e.anchors);
  read(j, "obstacles", e.obstacles);
}

void to_json(nlohmann::json& j, const ChannelModel& m) {
  j = {{"cir_length", m.cir_length},
       {"first_path_index_min", m.first_path_index_min},
       {"first_path_index_max", m.first_path_index_max},
       {"noise", m.noise},
       {"snr_db", m.snr_db},
       {"multipath_min", m.multipath_min},
       {"multipath_max", m.multipath_max},
       {"multipath_gain", m.multipath_gain},
       {"multipath_decay_ns", m.multipath_decay_ns},
       {"multipath_max_excess_ns", m.multipath_max_excess_ns},
       {"nlos_direct_gain_max", m.nlos_direct_gain_max},
       {"nlos_excess_min_m", m.nlos_excess_min_m},
       {"nlos_excess_max_m", m.nlos_excess_max_m},
       {"nlos_reflection_gain_min", m.nlos_reflection_gain_min},
       {"nlos_reflection_gain_max", m.nlos_reflection_gain_max},
       {"detection_threshold", m.detection_threshold},
       {"timestamp_noise_m", m.timestamp_noise_m},
       {"iq_scale", m.iq_scale},
       {"quantize", m.quantize}};
}

void from_json(const nlohmann::json& j, ChannelModel& m) {
  read(j, "cir_length", m.cir_length);
  read(j, "first_path_index_min", m.first_path_index_min);
  read(j, "first_path_index_max", m.first_path_index_max);
  read(j, "noise", m.noise);
  read(j, "snr_db", m.snr_db);
  read(j, "multipath_min", m.multipath_min);
  read(j, "multipath_max", m.multipath_max);
  read(j, "multipath_gain", m.multipath_gain);
  read(j, "multipath_decay_ns", m.multipath_decay_ns);
  read(j, "multipath_max_excess_ns", m.multipath_max_excess_ns);
  read(j, "nlos_direct_gain_max", m.nlos_direct_gain_max);
  read(j, "nlos_excess_min_m", m.nlos_excess_min_m);
  read(j, "nlos_excess_max_m", m.nlos_excess_max_m);
  read(j, "nlos_reflection_gain_min", m.nlos_reflection_gain_min);
  read(j, "nlos_reflection_gain_max", m.nlos_reflection_gain_max);
  read(j, "detection_threshold", m.detection_threshold);
  read(j, "timestamp_noise_m", m.timestamp_noise_m);
  read(j, "iq_scale", m.iq_scale);
  read(j, "quantize", m.quantize);
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"patching", to_string(c.patch.strategy)},
       {"l_patch", c.patch.l_patch},
       {"ordering", to_string(c.ordering)},
       {"encoding", to_string(c.encoding.kind)},
       {"omega_min", c.encoding.omega_min},
       {"omega_max", c.encoding.omega_max},
       {"dt_max_s", c.encoding.dt_max},
       {"clamp_positions", c.encoding.clamp},
       {"n_anchors", c.n_anchors},
       {"d_model", c.d_model},
       {"n_layers", c.n_layers},
       {"n_heads", c.n_heads},
       {"d_ff", c.d_ff},
       {"dropout", c.dropout},
       {"head_widths", c.head_widths},
       {"residual_output", c.residual_output}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  if (j.contains("patching")) c.patch.strategy = parse_patch_strategy(j.at("patching").get<std::string>());
  read(j, "l_patch", c.patch.l_patch);
  if (j.contains("ordering")) c.ordering = parse_ordering(j.at("ordering").get<std::string>());
  if (j.contains("encoding")) c.encoding.kind = parse_encoding_kind(j.at("encoding").get<std::string>());
  read(j, "omega_min", c.encoding.omega_min);
  read(j, "omega_max", c.encoding.omega_max);
  read(j, "dt_max_s", c.encoding.dt_max);
  read(j, "clamp_positions", c.encoding.clamp);
  read(j, "n_anchors", c.n_anchors);
  read(j, "d_model", c.d_model);
  read(j, "n_layers", c.n_layers);
  read(j, "n_heads", c.n_heads);
  read(j, "d_ff", c.d_ff);
  read(j, "dropout", c.dropout);
  read(j, "head_widths", c.head_widths);
  read(j, "residual_output", c.residual_output);
  c.encoding.d_model = c.d_model;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"batch_size", c.batch_size},
       {"lr_peak", c.lr_peak},
       {"warmup_fraction", c.warmup_fraction},
       {"max_epochs", c.max_epochs},
       {"early_stop_patience", c.early_stop_patience},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"adam_epsilon", c.adam_epsilon},
       {"validation_fraction", c.validation_fraction},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  read(j, "batch_size", c.batch_size);
  read(j, "lr_peak", c.lr_peak);
  read(j, "warmup_fraction", c.warmup_fraction);
  read(j, "max_epochs", c.max_epochs);
  read(j, "early_stop_patience", c.early_stop_patience);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "adam_epsilon", c.adam_epsilon);
  read(j, "validation_fraction", c.validation_fraction);
  read(j, "seed", c.seed);
}

void to_json(nlohmann::json& j, const BaselineConfig& c) {
  j = {{"pair_policy", to_string(c.policy)}, {"planar", c.planar}, {"tag_height", c.tag_height},
       {"clamp_to_extent", c.clamp_to_extent}};
}

void from_json(const nlohmann::json& j, BaselineConfig& c) {
  if (j.contains("pair_policy")) c.policy = parse_pair_policy(j.at("pair_policy").get<std::string>());
  read(j, "planar", c.planar);
  read(j, "tag_height", c.tag_height);
  read(j, "clamp_to_extent", c.clamp_to_extent);
}

}  // namespace uwbtc

void nlohmann::adl_serializer<uwbtc::Vector3d>::to_json(json& j, const uwbtc::Vector3d& v) {
  j = json::array({v.x(), v.y(), v.z()});
}

void nlohmann::adl_serializer<uwbtc::Vector3d>::from_json(const json& j, uwbtc::Vector3d& v) {
  if (!j.is_array() || j.size() != 3) uwbtc::fail(uwbtc::ErrorCode::kInvalidArgument, "expected a 3-element array");
  v = uwbtc::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}
