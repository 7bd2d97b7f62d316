// Copyright 2026 The Hydra Authors.
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

#include "hydra/error.h"

namespace hydra {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIndex: return "index";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kUnsupportedConfiguration: return "unsupported-configuration";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kUnsupportedVersion: return "unsupported-version";
    case ErrorCode::kUndefinedMetric: return "undefined-metric";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMissingArgument: return "missing-argument";
    case ErrorCode::kConflictingFlags: return "conflicting-flags";
  }
  return "unknown";
}

}  // namespace hydra
