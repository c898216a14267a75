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

#ifndef UWBTC_CHANNEL_SIM_HPP
#define UWBTC_CHANNEL_SIM_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "uwbtc/geometry.hpp"

namespace uwbtc {

/// Anchors, obstacles and the coordinate extent (X, Y, Z) used for normalization.
/// Coordinates live in [0, extent].
struct Environment {
  AnchorList anchors;
  std::vector<Box> obstacles;
  Vector3d extent = Vector3d::Ones();

  /// Throws invalid-config if the extent is not positive, ids repeat, or an
  /// anchor lies outside the extent.
  void validate() const;
  [[nodiscard]] const Anchor* find(int id) const;
  [[nodiscard]] bool within_extent(const Vector3d& p) const;
};

/// 30 m x 10 m x 3 m hall with 15 ceiling anchors and three rack rows.
Environment default_environment();

/// CIR as delivered by the radio: complex accumulator samples at 1 ns spacing.
struct RawCir {
  int anchor_id = 0;
  std::vector<std::complex<double>> iq;
  int first_path_index = 0;
  double rx_time = 0.0;  // seconds
  // Simulator ground truth; absent (defaults) for ingested data.
  bool los = true;
  double timestamp_error = 0.0;  // seconds, t'_n - t_n
};

struct Sample {
  int sample_id = 0;
  Vector3d true_position = Vector3d::Zero();
  double tx_time = 0.0;
  std::vector<RawCir> raw_cirs;

  [[nodiscard]] std::vector<int> detected_anchor_ids() const;
};

/// Placeholder channel statistics; nothing here is calibrated against real hardware.
struct ChannelModel {
  int cir_length = 192;
  int first_path_index_min = 60;
  int first_path_index_max = 70;
  bool noise = true;
  double snr_db = 20.0;  // relative to a unit-gain direct path
  int multipath_min = 3;
  int multipath_max = 8;
  double multipath_gain = 0.6;
  double multipath_decay_ns = 20.0;
  double multipath_max_excess_ns = 100.0;
  double nlos_direct_gain_max = 0.3;
  double nlos_excess_min_m = 0.5;
  double nlos_excess_max_m = 15.0;
  double nlos_reflection_gain_min = 0.6;
  double nlos_reflection_gain_max = 1.0;
  /// Leading-edge detector: earliest tap at or above this fraction of the strongest.
  double detection_threshold = 0.35;
  double timestamp_noise_m = 0.0;
  /// Accumulator scale; samples are rounded to integers when `quantize` is set.
  double iq_scale = 1000.0;
  bool quantize = true;
};

/// A single propagation path.
struct Tap {
  double delay = 0.0;  // seconds after transmission
  std::complex<double> gain;
};

/// True iff the open segment tag -> anchor misses every obstacle.
bool los_status(const Vector3d& tag, const Anchor& anchor, const std::vector<Box>& obstacles);

/// Raised-cosine pulse, 4 ns wide, unit peak at t = 0. `t` in nanoseconds.
double pulse_template(double t_ns);

/// Index of the tap the leading-edge detector reports.
std::size_t detect_first_path(const std::vector<Tap>& taps, double threshold);

/// Draws the tap set for one link from the channel model.
std::vector<Tap> draw_taps(const Vector3d& tag, const Anchor& anchor, const Environment& env,
                           const ChannelModel& model, std::mt19937_64& rng);

/// Renders taps into a RawCir: the detected tap sits exactly on `first_path_index`.
RawCir render_cir(const std::vector<Tap>& taps, int anchor_id, double tx_time,
                  const ChannelModel& model, std::mt19937_64& rng);

RawCir synth_cir(const Vector3d& tag, const Anchor& anchor, const Environment& env,
                 std::uint64_t seed, const ChannelModel& model = {}, double tx_time = 0.0);

/// One Sample per trajectory point; each anchor is dropped independently with
/// `drop_probability` (redrawn if every anchor would drop).
std::vector<Sample> generate_dataset(const Environment& env, const std::vector<Vector3d>& trajectory,
                                     double drop_probability, std::uint64_t seed,
                                     const ChannelModel& model = {});

/// Straight lines along x every `line_spacing` meters, sampled every `step` meters,
/// skipping points inside obstacles.
std::vector<Vector3d> grid_trajectory(const Environment& env, double line_spacing, double step,
                                      double tag_height);

/// Random walk through free space, `n_points` long.
std::vector<Vector3d> random_trajectory(const Environment& env, std::size_t n_points, double step,
                                        double tag_height, std::uint64_t seed);

}  // namespace uwbtc

#endif  // UWBTC_CHANNEL_SIM_HPP
