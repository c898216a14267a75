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

#include "uwbtc/tdoa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace uwbtc {
namespace {

using AnchorIndex = std::unordered_map<int, const Anchor*>;

AnchorIndex index_anchors(const AnchorList& anchors) {
  AnchorIndex index;
  index.reserve(anchors.size());
  for (const auto& anchor : anchors) index.emplace(anchor.id, &anchor);
  return index;
}

const Anchor& lookup(const AnchorIndex& index, int id) {
  auto it = index.find(id);
  if (it == index.end()) {
    fail(ErrorCode::kMissingAnchor, "anchor id " + std::to_string(id) + " not in anchor list");
  }
  return *it->second;
}

struct ResolvedPair {
  Vector3d a_i;
  Vector3d a_j;
  double ddoa;
};

std::vector<ResolvedPair> resolve(const DdoaSet& ddoas, const AnchorList& anchors) {
  const AnchorIndex index = index_anchors(anchors);
  std::vector<ResolvedPair> out;
  out.reserve(ddoas.pairs.size());
  for (const auto& pair : ddoas.pairs) {
    out.push_back({lookup(index, pair.i).position, lookup(index, pair.j).position, pair.ddoa});
  }
  return out;
}

Eigen::VectorXd residual_vector(const Vector3d& p, const std::vector<ResolvedPair>& pairs) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    r(static_cast<Eigen::Index>(k)) =
        ((p - pairs[k].a_i).norm() - (p - pairs[k].a_j).norm()) - pairs[k].ddoa;
  }
  return r;
}

// Jacobian rows are unit(p - a_i) - unit(p - a_j). A point sitting exactly on
// an anchor has an undefined gradient for that term; it contributes zero.
Eigen::MatrixXd jacobian(const Vector3d& p, const std::vector<ResolvedPair>& pairs) {
  auto unit = [&p](const Vector3d& a) -> Vector3d {
    const Vector3d d = p - a;
    const double n = d.norm();
    return n > 0.0 ? Vector3d(d / n) : Vector3d::Zero();
  };
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(pairs.size()), 3);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    jac.row(static_cast<Eigen::Index>(k)) = (unit(pairs[k].a_i) - unit(pairs[k].a_j)).transpose();
  }
  return jac;
}

PositionEstimate levenberg_marquardt(Vector3d p, const std::vector<ResolvedPair>& pairs,
                                     const SolverOptions& options) {
  // Free coordinates: (x, y, z) or (x, y) in planar mode.
  const Eigen::Index dof = options.planar ? 2 : 3;

  Eigen::VectorXd r = residual_vector(p, pairs);
  double cost = r.squaredNorm();
  double lambda = options.initial_lambda;

  PositionEstimate est;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    est.iterations = iter;
    const Eigen::MatrixXd jac = jacobian(p, pairs).leftCols(dof);
    const Eigen::VectorXd gradient = jac.transpose() * r;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    bool accepted = false;
    double step_norm = 0.0;
    // Inner loop raises damping until the cost decreases or the step vanishes.
    while (true) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
      step_norm = delta.norm();
      if (!std::isfinite(step_norm) || step_norm < options.step_tolerance) break;

      Vector3d candidate = p;
      candidate.head(dof) += delta;
      const Eigen::VectorXd r_new = residual_vector(candidate, pairs);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        p = candidate;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e15) break;
    }

    if (!std::isfinite(step_norm) || step_norm < options.step_tolerance) {
      est.converged = std::isfinite(step_norm);
      break;
    }
    if (!accepted) break;
  }

  est.position = p;
  est.residual_norm = std::sqrt(cost);
  return est;
}

// Spherical-intersection linearization against the first anchor: with o_k the
// offset d_k - d_ref, every other anchor gives one linear equation in
// (p, d_ref). Returns nothing when the system is underdetermined or singular.
std::optional<Vector3d> linearized_start(const DdoaSet& ddoas, const AnchorIndex& index,
                                         const std::vector<int>& ids, const SolverOptions& options) {
  std::unordered_map<int, double> offset;
  offset[ids.front()] = 0.0;
  // Propagate offsets through the pair graph.
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& pair : ddoas.pairs) {
      const bool has_i = offset.count(pair.i) > 0;
      const bool has_j = offset.count(pair.j) > 0;
      if (has_i && !has_j) {
        offset[pair.j] = offset[pair.i] - pair.ddoa;
        grew = true;
      } else if (has_j && !has_i) {
        offset[pair.i] = offset[pair.j] + pair.ddoa;
        grew = true;
      }
    }
  }
  const Vector3d a_ref = lookup(index, ids.front()).position;
  const Eigen::Index dof = options.planar ? 2 : 3;
  std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
  for (const auto& [id, o] : offset) {
    if (id == ids.front()) continue;
    const Vector3d a = lookup(index, id).position;
    Eigen::RowVectorXd row(dof + 1);
    row.head(dof) = 2.0 * (a - a_ref).head(dof).transpose();
    row(dof) = 2.0 * o;
    double rhs = a.squaredNorm() - a_ref.squaredNorm() - o * o;
    if (options.planar) rhs -= 2.0 * (a - a_ref).z() * options.fixed_z;
    rows.emplace_back(row, rhs);
  }
  if (static_cast<Eigen::Index>(rows.size()) < dof + 1) return std::nullopt;
  Eigen::MatrixXd a_mat(static_cast<Eigen::Index>(rows.size()), dof + 1);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a_mat.row(static_cast<Eigen::Index>(k)) = rows[k].first;
    b(static_cast<Eigen::Index>(k)) = rows[k].second;
  }
  const auto qr = a_mat.colPivHouseholderQr();
  if (qr.rank() < dof + 1) return std::nullopt;
  const Eigen::VectorXd x = qr.solve(b);
  Vector3d p = Vector3d::Constant(options.fixed_z);
  p.head(dof) = x.head(dof);
  if (!p.allFinite()) return std::nullopt;
  return p;
}

}  // namespace

double true_ddoa(const Vector3d& p, const Anchor& a_i, const Anchor& a_j) {
  if (a_i.id == a_j.id) {
    fail(ErrorCode::kInvalidArgument, "true_ddoa: same anchor used twice");
  }
  return euclidean_distance(p, a_i.position) - euclidean_distance(p, a_j.position);
}

DdoaSet measured_ddoa_set(const std::map<int, double>& timestamps, PairPolicy policy) {
  if (timestamps.size() < 2) {
    fail(ErrorCode::kInsufficientData, "need at least 2 timestamps, got " +
                                           std::to_string(timestamps.size()));
  }
  DdoaSet set;
  for (const auto& [id, t] : timestamps) {
    if (!std::isfinite(t)) fail(ErrorCode::kInvalidArgument, "non-finite timestamp");
    set.anchor_ids.push_back(id);
  }

  if (policy == PairPolicy::kAllPairs) {
    for (auto a = timestamps.begin(); a != timestamps.end(); ++a) {
      for (auto b = std::next(a); b != timestamps.end(); ++b) {
        set.pairs.push_back({a->first, b->first, kSpeedOfLight * (a->second - b->second)});
      }
    }
    return set;
  }

  // std::map iterates by ascending id, so min_element keeps the lowest id on ties.
  const auto ref = std::min_element(timestamps.begin(), timestamps.end(),
                                    [](const auto& l, const auto& r) { return l.second < r.second; });
  for (const auto& [id, t] : timestamps) {
    if (id == ref->first) continue;
    set.pairs.push_back({ref->first, id, kSpeedOfLight * (ref->second - t)});
  }
  return set;
}

Eigen::VectorXd residuals(const Vector3d& p, const DdoaSet& ddoas, const AnchorList& anchors) {
  return residual_vector(p, resolve(ddoas, anchors));
}

PositionEstimate solve_tdoa(const DdoaSet& ddoas, const AnchorList& anchors,
                            const std::optional<Vector3d>& init, const SolverOptions& options) {
  const std::vector<ResolvedPair> pairs = resolve(ddoas, anchors);

  std::vector<int> ids;
  for (const auto& pair : ddoas.pairs) {
    ids.push_back(pair.i);
    ids.push_back(pair.j);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 3) {
    fail(ErrorCode::kInsufficientAnchors,
         "need at least 3 distinct anchors, got " + std::to_string(ids.size()));
  }

  Vector3d p;
  if (init) {
    p = *init;
  } else {
    const AnchorIndex index = index_anchors(anchors);
    p.setZero();
    for (int id : ids) p += lookup(index, id).position;
    p /= static_cast<double>(ids.size());
  }
  if (options.planar) p.z() = options.fixed_z;
  if (!p.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite initial position");

  PositionEstimate est = levenberg_marquardt(p, pairs, options);
  if (!init) {
    // The centroid can sit in the basin of a spurious minimum; a second start
    // from the linearized solution keeps whichever ends lower.
    if (const auto start = linearized_start(ddoas, index_anchors(anchors), ids, options)) {
      const PositionEstimate alt = levenberg_marquardt(*start, pairs, options);
      if (alt.residual_norm < est.residual_norm) est = alt;
    }
  }
  return est;
}


}  // namespace uwbtc
