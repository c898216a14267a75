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

#ifndef UWBTC_TDOA_HPP
#define UWBTC_TDOA_HPP

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "uwbtc/geometry.hpp"

namespace uwbtc {

/// One hyperbolic measurement: d_i - d_j in meters.
struct DdoaPair {
  int i = 0;
  int j = 0;
  double ddoa = 0.0;
};

struct DdoaSet {
  std::vector<DdoaPair> pairs;
  std::vector<int> anchor_ids;  // sorted ascending
};

enum class PairPolicy {
  kAllPairs,
  /// N-1 pairs against the earliest receiver (lowest id on ties).
  kReferenceAnchor,
};

struct PositionEstimate {
  Vector3d position = Vector3d::Zero();
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;  // meters
  double initial_lambda = 1e-3;
  /// Fix z to `fixed_z` and solve only for (x, y).
  bool planar = false;
  double fixed_z = 0.0;
};

/// d_i - d_j for the tag at `p`.
double true_ddoa(const Vector3d& p, const Anchor& a_i, const Anchor& a_j);

/// Builds DDoAs c * (t'_i - t'_j) from per-anchor reception times in seconds.
/// Pairs are oriented (lower id, higher id) for all-pairs and (reference, other)
/// for the reference-anchor policy.
DdoaSet measured_ddoa_set(const std::map<int, double>& timestamps,
                          PairPolicy policy = PairPolicy::kReferenceAnchor);

/// Per-pair residual [d_i(p) - d_j(p)] - ddoa_ij.
Eigen::VectorXd residuals(const Vector3d& p, const DdoaSet& ddoas, const AnchorList& anchors);

/// Levenberg-Marquardt over the hyperboloid residuals. Starts from the centroid
/// of participating anchors unless `init` is given; without `init` a second run
/// from the linearized closed-form solution is tried and the lower cost kept. Non-convergence is reported
/// through `converged`, not thrown.
PositionEstimate solve_tdoa(const DdoaSet& ddoas, const AnchorList& anchors,
                            const std::optional<Vector3d>& init = std::nullopt,
                            const SolverOptions& options = {});

}  // namespace uwbtc

#endif  // UWBTC_TDOA_HPP
