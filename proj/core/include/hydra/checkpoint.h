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

#ifndef HYDRA_CHECKPOINT_H_
#define HYDRA_CHECKPOINT_H_

#include <filesystem>
#include <optional>
#include <string>

#include "hydra/model.h"
#include "hydra/tokenizer.h"

namespace hydra {

inline constexpr const char* kCheckpointFormat = "hydra-ckpt-1";

// Binary little-endian layout:
//   u32 header length, UTF-8 JSON header (format, every ModelConfig field,
//   optional vocabulary tokens and fingerprint)
//   u32 entry count, then per parameter: u32 name length, name, u32 ndims,
//   u32 dims..., float32 payload
//   u64 FNV-1a checksum of all preceding bytes
struct LoadedCheckpoint {
  Model<float> model;
  std::optional<Vocabulary> vocabulary;
};

std::string SerializeCheckpoint(const Model<float>& model,
                                const Vocabulary* vocabulary = nullptr);
// Throws Error(kUnsupportedVersion) for a foreign format tag and
// Error(kIntegrity) for truncated or corrupted bytes.
LoadedCheckpoint ParseCheckpoint(const std::string& bytes);

void SaveCheckpoint(const Model<float>& model, const std::filesystem::path& path,
                    const Vocabulary* vocabulary = nullptr);
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace hydra

#endif  // HYDRA_CHECKPOINT_H_
