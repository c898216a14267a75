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

#ifndef UWBTC_GEOMETRY_HPP
#define UWBTC_GEOMETRY_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "uwbtc/error.hpp"

namespace uwbtc {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vector3d = Vector3<double>;

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Fixed receiver with a known position in meters.
struct Anchor {
  int id = 0;
  Vector3d position = Vector3d::Zero();
};

using AnchorList = std::vector<Anchor>;

/// Axis-aligned box obstacle, meters.
struct Box {
  Vector3d min = Vector3d::Zero();
  Vector3d max = Vector3d::Zero();

  [[nodiscard]] bool contains(const Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Euclidean distance between two points. Throws on non-finite input.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean_distance(const Eigen::MatrixBase<DerivedA>& p,
                                             const Eigen::MatrixBase<DerivedB>& a) {
  if (!p.allFinite() || !a.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "euclidean_distance: non-finite coordinate");
  }
  return (p - a).norm();
}

}  // namespace uwbtc

#endif  // UWBTC_GEOMETRY_HPP
