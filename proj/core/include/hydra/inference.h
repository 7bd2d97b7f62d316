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

#ifndef HYDRA_INFERENCE_H_
#define HYDRA_INFERENCE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydra/model.h"
#include "hydra/tokenizer.h"

namespace hydra {

// How the mixture weights are chosen at every step.
struct GateSpec {
  enum class Kind { kSingle, kLearned, kManual };

  Kind kind = Kind::kLearned;
  std::size_t decoder = 0;
  GateVector manual;

  static GateSpec Single(std::size_t j);
  static GateSpec Learned();
  static GateSpec Manual(std::vector<double> g);
  // "single:J", "learned" or "manual:G0,G1,...". Throws Error(kParse).
  static GateSpec Parse(std::string_view text);
  std::string ToString() const;
  // Throws Error(kIndex) for single(j) with j >= k and
  // Error(kInvalidArgument) for a malformed manual vector.
  void Validate(std::size_t k) const;
};

enum class DecodeMode { kBeam, kSample };

struct DecodingConfig {
  std::size_t beam_width = 4;
  // Exponent alpha of the ((5 + len) / 6)^alpha length penalty.
  double length_penalty = 1.0;
  // 0 disables n-gram blocking.
  std::size_t no_repeat_ngram = 3;
  std::size_t min_length = 3;
  std::size_t max_length = 40;
  // 0 keeps every token.
  std::size_t top_k = 30;
  double top_p = 0.5;
  DecodeMode mode = DecodeMode::kBeam;
  // Apply the top-k/top-p filter to beam expansions as well.
  bool filter_in_beam = false;
  std::uint64_t seed = 0;

  static DecodingConfig Desk();
  static DecodingConfig Paper();
  // Throws Error(kValidation) naming the offending fields.
  void Validate() const;
};

inline constexpr double kDefaultSweep[] = {0.0, 0.25, 0.5, 0.75, 1.0};

struct Filtered {
  std::vector<double> probs;
  // Every token was eliminated; probs is the renormalized input.
  bool fallback = false;
};

// PAD and BOS are removed, EOS is removed while fewer than min_length tokens
// were generated, and any token completing an n-gram already present in the
// generated part of prefix (which starts with BOS) is removed. The result is
// renormalized.
Filtered ApplyConstraints(std::span<const double> distribution,
                          std::span<const int> prefix,
                          const DecodingConfig& config);

// Top-k, then the smallest descending-probability prefix whose mass reaches
// top_p; renormalized. Ties keep the lower token id first.
std::vector<double> NucleusFilter(std::span<const double> distribution,
                                  std::size_t top_k, double top_p);
int NucleusSample(std::span<const double> distribution, std::size_t top_k,
                  double top_p, std::mt19937_64& rng);

double LengthPenalty(std::size_t length, double alpha);

// A generated continuation; tokens exclude BOS and end with EOS when
// finished.
struct Hypothesis {
  std::vector<int> tokens;
  double logprob = 0.0;
  double score = 0.0;
  bool finished = false;
};

// Next-token distribution for a prefix starting with BOS; constraints are
// the caller's responsibility.
using NextFn = std::function<std::vector<double>(std::span<const int> prefix)>;

// Length-penalized beam search that stops once beam_width hypotheses have
// finished. Returns finished hypotheses by descending score, or the live
// ones when max_length is hit first.
std::vector<Hypothesis> BeamSearch(const NextFn& next, const DecodingConfig& config,
                                   int bos = kBosId, int eos = kEosId);
Hypothesis SampleSequence(const NextFn& next, const DecodingConfig& config,
                          std::mt19937_64& rng, int bos = kBosId, int eos = kEosId);

// Encoder states and cross-attention cache of one document.
class DecodingSession {
 public:
  DecodingSession(const Model<float>& model, std::span<const int> article_ids);

  struct Step {
    std::vector<std::vector<double>> probs;  // k x vocab
    std::vector<float> shared_hidden;
  };
  // Decoder outputs at the last prefix position.
  Step Forward(std::span<const int> prefix) const;
  std::vector<double> Next(std::span<const int> prefix, const GateSpec& gate) const;

  const Model<float>& model() const { return *model_; }
  const EncoderStates<float>& encoder() const { return encoder_; }

 private:
  const Model<float>* model_;
  EncoderStates<float> encoder_;
  Model<float>::CrossCache cache_;
};

struct NextDistributionResult {
  std::vector<double> probs;
  // A learned gate was requested from a model trained with oracle gates.
  bool learned_gate_on_guided = false;
};

NextDistributionResult NextDistribution(const Model<float>& model,
                                        const EncoderStates<float>& encoder,
                                        std::span<const int> prefix,
                                        const GateSpec& gate);

struct GenerationResult {
  std::vector<Hypothesis> hypotheses;
  bool constraint_fallback = false;
  bool learned_gate_on_guided = false;
  bool input_truncated = false;

  const Hypothesis& best() const { return hypotheses.front(); }
};

// Beam search or sampling (per config.mode) under one gate spec.
GenerationResult Generate(const Model<float>& model, std::span<const int> article_ids,
                          const GateSpec& gate, const DecodingConfig& config);

// One decode per g with the manual gate [1 - g, g]; needs k == 2.
std::vector<GenerationResult> GenerateDiverse(
    const Model<float>& model, std::span<const int> article_ids,
    const DecodingConfig& config,
    std::span<const double> gate_values = kDefaultSweep);

struct CrossMember {
  const Model<float>& model;
  const Vocabulary& vocabulary;
  std::size_t decoder;
};

// Mixes (1 - g) P from a's decoder with g P from b's decoder, each over its
// own encoding of the article. Throws Error(kInvalidArgument) unless both
// members share one vocabulary.
GenerationResult CrossModelGenerate(const CrossMember& a, const CrossMember& b,
                                    double g, std::string_view article,
                                    const DecodingConfig& config);

}  // namespace hydra

#endif  // HYDRA_INFERENCE_H_
