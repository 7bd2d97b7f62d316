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

#ifndef HYDRA_TRAINING_H_
#define HYDRA_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydra/corpus.h"
#include "hydra/metrics.h"
#include "hydra/model.h"
#include "hydra/tokenizer.h"

namespace hydra {

enum class Feature { kAbstractiveness, kSpecificity };
enum class GateLevel { kSummary, kSentence };
enum class TrainMode { kUnguided, kGuided };

// Throw Error(kConfig) on unknown names.
Feature ParseFeature(std::string_view name);
GateLevel ParseGateLevel(std::string_view name);
TrainMode ParseTrainMode(std::string_view name);
std::string FeatureName(Feature feature);
std::string GateLevelName(GateLevel level);
std::string TrainModeName(TrainMode mode);

struct SplitConfig {
  Feature feature = Feature::kAbstractiveness;
  std::size_t buckets = 5;
  GateLevel level = GateLevel::kSummary;

  void Validate() const;
};

// Bigram overlap of the reference summary with its article, or the
// macro-averaged specificity of the summary.
double ComputeFeature(const Example& example, Feature feature,
                      const metrics::SpecificityScorer& scorer);
double ComputeFeature(const Example& example, Feature feature);

// Ranks the units (summaries, or summary sentences) by feature score,
// assigns bucket b = rank * n / N over the stable ascending order and gate
// b / (n - 1). Units whose feature is undefined score 0. Existing gates are
// replaced.
Corpus PercentileSplit(const Corpus& corpus, const SplitConfig& config,
                       const metrics::SpecificityScorer& scorer);
Corpus PercentileSplit(const Corpus& corpus, const SplitConfig& config);

// summary is [BOS, y_1 .. y_n, EOS]; token_gates holds one gate per target
// token (y_1 .. EOS) when the example carries gates, else it is empty.
struct TokenizedExample {
  std::vector<int> article;
  std::vector<int> summary;
  std::vector<double> token_gates;
};

// Sentence gates are broadcast to the tokens of their sentence; EOS takes
// the gate of the last sentence. Throws Error(kInvalidArgument) when the
// sentence gates do not align with SplitSentences(summary).
TokenizedExample Tokenize(const Example& example, const Vocabulary& vocabulary);
std::vector<TokenizedExample> Tokenize(const Corpus& corpus,
                                       const Vocabulary& vocabulary);

// Recorded loss of one example: -sum_i log sum_j g_ij P_j(y_i). Unguided
// gates come from the gating head; guided gates are the constants
// [1 - g_i, g_i] and need k == 2.
template <typename T>
Var ExampleLoss(Tape<T>& tape, const Model<T>& model,
                const TokenizedExample& example, TrainMode mode);

// Mean over the batch of the summed token loss. With compute_gradients the
// parameter gradients are reset and filled.
template <typename T>
T UnguidedLoss(const Model<T>& model, std::span<const TokenizedExample> batch,
               bool compute_gradients = false);
template <typename T>
T GuidedLoss(const Model<T>& model, std::span<const TokenizedExample> batch,
             bool compute_gradients = false);
// Cross-entropy of decoder j alone, same reduction.
template <typename T>
T DecoderCrossEntropy(const Model<T>& model,
                      std::span<const TokenizedExample> batch,
                      std::size_t decoder, bool compute_gradients = false);

struct TrainConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double max_grad_norm = 1.0;
  std::size_t batch_size = 16;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kUnguided;

  static TrainConfig Desk();
  static TrainConfig Paper(Feature feature = Feature::kAbstractiveness);
  // Throws Error(kConfig) for a non-positive batch size, negative learning
  // rate or betas outside [0, 1).
  void Validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss_per_example = 0.0;
  double loss_per_token = 0.0;
  double learning_rate = 0.0;
};

// Adam with global-norm clipping and a learning rate decaying linearly to 0
// over all steps. Example order is reshuffled every epoch from `seed`.
// Throws Error(kDivergence) when a batch loss is not finite.
std::vector<EpochLog> Train(Model<float>& model,
                            std::span<const TokenizedExample> examples,
                            const TrainConfig& config,
                            const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace hydra

#endif  // HYDRA_TRAINING_H_
