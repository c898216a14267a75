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

#ifndef UWBTC_ERROR_HPP
#define UWBTC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace uwbtc {

enum class ErrorCode {
  kInvalidArgument,
  kInsufficientData,
  kInsufficientAnchors,
  kMissingAnchor,
  kOutOfBounds,
  kInvalidConfig,
  kIncompatibleOrdering,
  kIncompatibleEncoding,
  kShape,
  kInvalidIndex,
  kNumericOverflow,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on `code()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kInsufficientAnchors: return "insufficient-anchors";
    case ErrorCode::kMissingAnchor: return "missing-anchor";
    case ErrorCode::kOutOfBounds: return "out-of-bounds";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kIncompatibleOrdering: return "incompatible-ordering";
    case ErrorCode::kIncompatibleEncoding: return "incompatible-encoding";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kInvalidIndex: return "invalid-index";
    case ErrorCode::kNumericOverflow: return "numeric-overflow";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace uwbtc

#endif  // UWBTC_ERROR_HPP
