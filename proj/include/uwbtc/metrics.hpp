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

#ifndef UWBTC_METRICS_HPP
#define UWBTC_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "uwbtc/geometry.hpp"

namespace uwbtc {

/// CEP levels reported everywhere, in percent.
inline constexpr std::array<int, 5> kCepLevels = {50, 75, 90, 95, 99};

struct MetricsReport {
  double mae = 0.0;
  std::map<int, double> cep;
  std::size_t n_samples = 0;
};

template <typename Scalar>
std::vector<Scalar> euclidean_errors(const std::vector<Vector3<Scalar>>& estimates,
                                     const std::vector<Vector3<Scalar>>& truths) {
  if (estimates.size() != truths.size() || estimates.empty()) {
    fail(ErrorCode::kInvalidArgument, "metrics need equal-length, non-empty position lists");
  }
  std::vector<Scalar> errors(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) errors[k] = (estimates[k] - truths[k]).norm();
  return errors;
}

/// Smallest radius covering at least q percent of `errors`: the ceil(q n / 100)-th
/// order statistic.
template <typename Scalar>
Scalar cep_from_errors(std::vector<Scalar> errors, double q) {
  if (errors.empty()) fail(ErrorCode::kInvalidArgument, "cep of an empty error set");
  if (!(q > 0.0 && q <= 100.0)) fail(ErrorCode::kInvalidArgument, "cep level must lie in (0, 100]");
  const double n = static_cast<double>(errors.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, errors.size());
  std::nth_element(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(rank - 1), errors.end());
  return errors[rank - 1];
}

/// Mean Euclidean error.
template <typename Scalar>
Scalar mae(const std::vector<Vector3<Scalar>>& estimates, const std::vector<Vector3<Scalar>>& truths) {
  const auto errors = euclidean_errors(estimates, truths);
  Scalar sum = 0;
  for (Scalar e : errors) sum += e;
  return sum / static_cast<Scalar>(errors.size());
}

template <typename Scalar>
Scalar cep(const std::vector<Vector3<Scalar>>& estimates, const std::vector<Vector3<Scalar>>& truths, double q) {
  return cep_from_errors(euclidean_errors(estimates, truths), q);
}

inline MetricsReport metrics_report(const std::vector<Vector3d>& estimates, const std::vector<Vector3d>& truths) {
  MetricsReport report;
  const auto errors = euclidean_errors(estimates, truths);
  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mae = sum / static_cast<double>(errors.size());
  for (int level : kCepLevels) report.cep[level] = cep_from_errors(errors, level);
  report.n_samples = errors.size();
  return report;
}

}  // namespace uwbtc

#endif  // UWBTC_METRICS_HPP
