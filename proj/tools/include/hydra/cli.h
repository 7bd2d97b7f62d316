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

#ifndef HYDRA_CLI_H_
#define HYDRA_CLI_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hydra/inference.h"
#include "hydra/model.h"
#include "hydra/training.h"

namespace hydra::cli {

// Everything a command may tune, fully materialized.
struct RunConfig {
  std::string preset = "desk";
  ModelConfig model;
  TrainConfig train;
  DecodingConfig decoding;
  std::uint64_t seed = 0;
};

// Explicitly passed flags; unset fields fall back to the preset.
struct Overrides {
  std::optional<std::size_t> d_model, n_heads, encoder_layers, decoder_layers,
      shared_layers, num_decoders, ff_width, max_positions;
  std::optional<double> learning_rate, weight_decay, max_grad_norm, beta1, beta2,
      adam_epsilon;
  std::optional<std::size_t> batch_size, epochs;
  std::optional<std::size_t> num_beams, no_repeat_ngram, min_length, max_length,
      top_k;
  std::optional<double> length_penalty, top_p;
  std::optional<DecodeMode> decode_mode;
  std::optional<bool> filter_in_beam;
  std::optional<std::uint64_t> seed;
};

// "desk" or "paper"; throws Error(kConfig) otherwise. The feature selects
// the paper-preset learning rate.
RunConfig PresetConfig(std::string_view preset,
                       Feature feature = Feature::kAbstractiveness);
// Precedence: explicit flag > preset. Throws Error(kValidation) naming both
// flags of a conflicting pair.
RunConfig ResolveConfig(std::string_view preset, const Overrides& flags,
                        Feature feature = Feature::kAbstractiveness);
nlohmann::json ToJson(const RunConfig& config);

// args excludes the program name. Returns 0 on success, 1 on a failed
// command and 2 on a usage error; failures print "category: message".
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hydra::cli

#endif  // HYDRA_CLI_H_
