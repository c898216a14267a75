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

#include "uwbtc/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace uwbtc {
namespace {

constexpr double kNs = 1e-9;
constexpr double kPulseHalfWidthNs = 2.0;

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::complex<double> random_phase(std::mt19937_64& rng) {
  return std::polar(1.0, uniform(rng, 0.0, 2.0 * std::numbers::pi));
}

bool blocked(const Vector3d& p, const std::vector<Box>& obstacles, double margin) {
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Box& b) {
    return (p.head<2>().array() >= b.min.head<2>().array() - margin).all() &&
           (p.head<2>().array() <= b.max.head<2>().array() + margin).all() &&
           p.z() >= b.min.z() && p.z() <= b.max.z();
  });
}

}  // namespace

void Environment::validate() const {
  if (!extent.allFinite() || (extent.array() <= 0.0).any()) {
    fail(ErrorCode::kInvalidConfig, "environment extent must be strictly positive");
  }
  std::set<int> ids;
  for (const auto& anchor : anchors) {
    if (!ids.insert(anchor.id).second) {
      fail(ErrorCode::kInvalidConfig, "duplicate anchor id " + std::to_string(anchor.id));
    }
    if (!within_extent(anchor.position)) {
      fail(ErrorCode::kInvalidConfig, "anchor " + std::to_string(anchor.id) + " outside extent");
    }
  }
}

const Anchor* Environment::find(int id) const {
  auto it = std::find_if(anchors.begin(), anchors.end(), [id](const Anchor& a) { return a.id == id; });
  return it == anchors.end() ? nullptr : &*it;
}

bool Environment::within_extent(const Vector3d& p) const {
  return p.allFinite() && (p.array() >= 0.0).all() && (p.array() <= extent.array()).all();
}

Environment default_environment() {
  Environment env;
  env.extent = Vector3d(30.0, 10.0, 3.0);
  const double xs[] = {1.0, 8.5, 15.0, 21.5, 29.0};
  const double ys[] = {0.5, 5.0, 9.5};
  int id = 1;
  for (double y : ys) {
    for (double x : xs) {
      const double z = (y == 5.0) ? 2.2 : 2.8;
      env.anchors.push_back({id++, Vector3d(x, y, z)});
    }
  }
  for (double x0 : {4.5, 11.5, 18.5}) {
    env.obstacles.push_back({Vector3d(x0, 2.0, 0.0), Vector3d(x0 + 2.0, 8.0, 2.6)});
  }
  return env;
}

std::vector<int> Sample::detected_anchor_ids() const {
  std::vector<int> ids;
  ids.reserve(raw_cirs.size());
  for (const auto& cir : raw_cirs) ids.push_back(cir.anchor_id);
  return ids;
}

bool los_status(const Vector3d& tag, const Anchor& anchor, const std::vector<Box>& obstacles) {
  const Vector3d dir = anchor.position - tag;
  for (const auto& box : obstacles) {
    // Slab test on the parametric segment tag + t * dir, t in (0, 1).
    double t_enter = 0.0;
    double t_exit = 1.0;
    bool miss = false;
    for (int axis = 0; axis < 3 && !miss; ++axis) {
      if (dir[axis] == 0.0) {
        miss = tag[axis] < box.min[axis] || tag[axis] > box.max[axis];
        continue;
      }
      double t0 = (box.min[axis] - tag[axis]) / dir[axis];
      double t1 = (box.max[axis] - tag[axis]) / dir[axis];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      miss = t_enter > t_exit;
    }
    if (!miss && t_exit > 0.0 && t_enter < 1.0) return false;
  }
  return true;
}

double pulse_template(double t_ns) {
  if (std::abs(t_ns) >= kPulseHalfWidthNs) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * t_ns / kPulseHalfWidthNs));
}

std::size_t detect_first_path(const std::vector<Tap>& taps, double threshold) {
  if (taps.empty()) fail(ErrorCode::kInvalidArgument, "detect_first_path: no taps");
  double strongest = 0.0;
  for (const auto& tap : taps) strongest = std::max(strongest, std::abs(tap.gain));
  std::size_t best = taps.size();
  for (std::size_t k = 0; k < taps.size(); ++k) {
    if (std::abs(taps[k].gain) >= threshold * strongest &&
        (best == taps.size() || taps[k].delay < taps[best].delay)) {
      best = k;
    }
  }
  return best;
}

std::vector<Tap> draw_taps(const Vector3d& tag, const Anchor& anchor, const Environment& env,
                           const ChannelModel& model, std::mt19937_64& rng) {
  const double direct_delay = euclidean_distance(tag, anchor.position) / kSpeedOfLight;
  std::vector<Tap> taps;
  if (los_status(tag, anchor, env.obstacles)) {
    taps.push_back({direct_delay, random_phase(rng)});
  } else {
    const double attenuation = uniform(rng, 0.0, model.nlos_direct_gain_max);
    taps.push_back({direct_delay, attenuation * random_phase(rng)});
    const double excess_m = uniform(rng, model.nlos_excess_min_m, model.nlos_excess_max_m);
    const double gain = uniform(rng, model.nlos_reflection_gain_min, model.nlos_reflection_gain_max);
    taps.push_back({direct_delay + excess_m / kSpeedOfLight, gain * random_phase(rng)});
  }
  const int n_multipath =
      std::uniform_int_distribution<int>(model.multipath_min, model.multipath_max)(rng);
  for (int s = 0; s < n_multipath; ++s) {
    const double excess_ns = uniform(rng, 1.0, model.multipath_max_excess_ns);
    // Exponential power-delay profile: amplitude decays at half the power rate.
    const double amplitude = model.multipath_gain * uniform(rng, 0.5, 1.0) *
                             std::exp(-excess_ns / (2.0 * model.multipath_decay_ns));
    taps.push_back({direct_delay + excess_ns * kNs, amplitude * random_phase(rng)});
  }
  return taps;
}

RawCir render_cir(const std::vector<Tap>& taps, int anchor_id, double tx_time,
                  const ChannelModel& model, std::mt19937_64& rng) {
  if (model.cir_length < 150) fail(ErrorCode::kInvalidConfig, "cir_length must be >= 150");
  const std::size_t detected = detect_first_path(taps, model.detection_threshold);
  const double first_delay = taps[detected].delay;

  RawCir cir;
  cir.anchor_id = anchor_id;
  cir.first_path_index = std::uniform_int_distribution<int>(model.first_path_index_min,
                                                            model.first_path_index_max)(rng);
  const double direct_delay =
      std::min_element(taps.begin(), taps.end(), [](const Tap& a, const Tap& b) {
        return a.delay < b.delay;
      })->delay;
  cir.timestamp_error = first_delay - direct_delay;
  if (model.timestamp_noise_m > 0.0) {
    cir.timestamp_error += std::normal_distribution<double>(0.0, model.timestamp_noise_m)(rng) / kSpeedOfLight;
  }
  cir.rx_time = tx_time + direct_delay + cir.timestamp_error;

  // Sample k sits at first_delay + (k - first_path_index) ns.
  cir.iq.assign(static_cast<std::size_t>(model.cir_length), {0.0, 0.0});
  for (const auto& tap : taps) {
    const double centre = cir.first_path_index + (tap.delay - first_delay) / kNs;
    const int lo = std::max(0, static_cast<int>(std::ceil(centre - kPulseHalfWidthNs)));
    const int hi = std::min(model.cir_length - 1, static_cast<int>(std::floor(centre + kPulseHalfWidthNs)));
    for (int k = lo; k <= hi; ++k) {
      cir.iq[static_cast<std::size_t>(k)] += tap.gain * pulse_template(k - centre);
    }
  }
  if (model.noise) {
    const double sigma = std::pow(10.0, -model.snr_db / 20.0) / std::numbers::sqrt2;
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& v : cir.iq) v += std::complex<double>(gauss(rng), gauss(rng));
  }
  for (auto& v : cir.iq) {
    v *= model.iq_scale;
    if (model.quantize) v = {std::round(v.real()), std::round(v.imag())};
  }
  return cir;
}

RawCir synth_cir(const Vector3d& tag, const Anchor& anchor, const Environment& env,
                 std::uint64_t seed, const ChannelModel& model, double tx_time) {
  if (!env.within_extent(tag)) fail(ErrorCode::kOutOfBounds, "tag outside environment extent");
  auto rng = derived_rng(seed, static_cast<std::uint64_t>(anchor.id));
  const std::vector<Tap> taps = draw_taps(tag, anchor, env, model, rng);
  RawCir cir = render_cir(taps, anchor.id, tx_time, model, rng);
  cir.los = los_status(tag, anchor, env.obstacles);
  return cir;
}

std::vector<Sample> generate_dataset(const Environment& env, const std::vector<Vector3d>& trajectory,
                                     double drop_probability, std::uint64_t seed,
                                     const ChannelModel& model) {
  if (trajectory.empty()) fail(ErrorCode::kInvalidArgument, "empty trajectory");
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "drop_probability must lie in [0, 1)");
  }
  if (env.anchors.empty()) fail(ErrorCode::kInvalidArgument, "environment has no anchors");
  env.validate();

  std::vector<Sample> samples;
  samples.reserve(trajectory.size());
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    auto rng = derived_rng(seed, n, 0x5a3d1e);
    Sample sample;
    sample.sample_id = static_cast<int>(n);
    sample.true_position = trajectory[n];
    // Small absolute times keep sub-micrometer resolution in double precision.
    sample.tx_time = uniform(rng, 0.0, 1e-3);

    std::vector<const Anchor*> receivers;
    std::bernoulli_distribution drop(drop_probability);
    do {
      receivers.clear();
      for (const auto& anchor : env.anchors) {
        if (!drop(rng)) receivers.push_back(&anchor);
      }
    } while (receivers.empty());

    const std::uint64_t link_seed = rng();
    for (const Anchor* anchor : receivers) {
      sample.raw_cirs.push_back(
          synth_cir(sample.true_position, *anchor, env, link_seed, model, sample.tx_time));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<Vector3d> grid_trajectory(const Environment& env, double line_spacing, double step,
                                      double tag_height) {
  if (line_spacing <= 0.0 || step <= 0.0) fail(ErrorCode::kInvalidArgument, "spacing must be positive");
  constexpr double kMargin = 0.3;
  std::vector<Vector3d> points;
  int line = 0;
  for (double y = line_spacing / 2.0; y < env.extent.y(); y += line_spacing, ++line) {
    std::vector<Vector3d> row;
    for (double x = kMargin; x <= env.extent.x() - kMargin; x += step) {
      const Vector3d p(x, y, tag_height);
      if (!blocked(p, env.obstacles, 0.2)) row.push_back(p);
    }
    // Alternate direction like a lawnmower sweep.
    if (line % 2 == 1) std::reverse(row.begin(), row.end());
    points.insert(points.end(), row.begin(), row.end());
  }
  return points;
}

std::vector<Vector3d> random_trajectory(const Environment& env, std::size_t n_points, double step,
                                        double tag_height, std::uint64_t seed) {
  constexpr double kMargin = 0.3;
  auto rng = derived_rng(seed, 0xe7a1);
  auto free = [&](const Vector3d& p) {
    return p.x() >= kMargin && p.x() <= env.extent.x() - kMargin && p.y() >= kMargin &&
           p.y() <= env.extent.y() - kMargin && !blocked(p, env.obstacles, 0.2);
  };
  Vector3d p;
  do {
    p = Vector3d(uniform(rng, 0.0, env.extent.x()), uniform(rng, 0.0, env.extent.y()), tag_height);
  } while (!free(p));

  double heading = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> turn(0.0, 0.35);
  std::vector<Vector3d> points;
  points.reserve(n_points);
  while (points.size() < n_points) {
    points.push_back(p);
    for (int attempt = 0;; ++attempt) {
      heading += attempt == 0 ? turn(rng) : uniform(rng, 0.0, 2.0 * std::numbers::pi);
      const Vector3d next = p + step * Vector3d(std::cos(heading), std::sin(heading), 0.0);
      if (free(next)) {
        p = next;
        break;
      }
    }
  }
  return points;
}

}  // namespace uwbtc
