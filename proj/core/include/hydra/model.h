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

#ifndef HYDRA_MODEL_H_
#define HYDRA_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hydra/numerics/tape.h"
#include "hydra/numerics/tensor.h"

namespace hydra {

using numerics::Parameter;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

// Shape of the multi-decoder network. decoder_layers is the depth M of every
// decoder; the bottom shared_layers (m) of them exist once and feed all
// num_decoders (k) decoder tops.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 4;
  std::size_t shared_layers = 2;
  std::size_t num_decoders = 2;
  std::size_t ff_width = 256;
  std::size_t max_positions = 256;
  std::uint64_t seed = 0;
  // Set once the weights were trained with oracle gates.
  bool guided = false;

  // Throws Error(kConfig) unless 0 <= m < M, k >= 1, heads divide d_model and
  // every size is positive.
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Mixture weights over the k decoders at one time step.
struct GateVector {
  std::vector<double> g;

  // Throws Error(kInvalidArgument) unless entries are nonnegative and sum to
  // 1 within 1e-6.
  void Validate() const;
  static GateVector Uniform(std::size_t k);
  static GateVector OneHot(std::size_t k, std::size_t j);
};

template <typename T>
struct EncoderStates {
  Tensor<T> states;  // positions x d_model
  bool truncated = false;
  std::size_t original_length = 0;
};

// Decoder output at one prefix position.
template <typename T>
struct StepOutput {
  std::vector<T> shared_hidden;                     // h^m, d_model entries
  std::vector<std::vector<T>> per_decoder_logprobs;  // k x vocab
};

// Recorded decoder pass over a whole prefix.
struct DecoderPass {
  Var shared_hidden;        // T x d_model, consumed by every decoder top
  std::vector<Var> logits;  // one T x vocab matrix per decoder
};

template <typename T>
class Model {
 public:
  // Weights ~ N(0, 0.02), layer-norm gains 1, biases 0. Every decoder top is
  // a copy of one draw plus independent N(0, 1e-3) noise. The gating matrix
  // is d_model x k with entries ~ N(0, 0.02). Deterministic in seed.
  static Model Init(const ModelConfig& config, std::uint64_t seed);
  // Rebuilds a model from named tensors; every expected name must be
  // present with the expected shape.
  static Model FromTensors(const ModelConfig& config,
                           const std::map<std::string, Tensor<T>>& tensors);

  const ModelConfig& config() const { return config_; }
  std::size_t num_decoders() const { return config_.num_decoders; }
  void set_guided(bool guided) { config_.guided = guided; }

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  Parameter<T>& parameter(const std::string& name);
  const Parameter<T>& parameter(const std::string& name) const;
  std::size_t num_weights() const;
  void ZeroGrad() const;

  template <typename U>
  Model<U> Cast() const;

  // Recording API used by the losses. Encoder input longer than
  // max_positions is truncated.
  Var Encode(Tape<T>& tape, std::span<const int> ids) const;
  // prefix must start with BOS. Cross-attention keys/values are derived from
  // encoder_states on the tape.
  DecoderPass Decode(Tape<T>& tape, Var encoder_states,
                     std::span<const int> prefix) const;
  // softmax(h W) per row; T x k.
  Var Gate(Tape<T>& tape, Var shared_hidden) const;

  // Per-layer cross-attention keys and values precomputed for inference.
  struct CrossCache {
    std::vector<Tensor<T>> shared_keys, shared_values;
    std::vector<std::vector<Tensor<T>>> top_keys, top_values;
  };
  CrossCache BuildCrossCache(const Tensor<T>& encoder_states) const;
  // Inference pass using cached cross-attention; logits are produced only
  // for rows [first_row, T).
  DecoderPass DecodeCached(Tape<T>& tape, const CrossCache& cache,
                           std::span<const int> prefix,
                           std::size_t first_row) const;

  std::size_t EncoderInputLength(std::size_t n) const {
    return n < config_.max_positions ? n : config_.max_positions;
  }

 private:
  struct LayerNormIds { std::size_t gain, bias; };
  struct AttentionIds { std::size_t wq, bq, wk, bk, wv, bv, wo, bo; };
  struct FeedForwardIds { std::size_t w1, b1, w2, b2; };
  struct EncoderLayerIds {
    LayerNormIds ln1, ln2;
    AttentionIds attn;
    FeedForwardIds ff;
  };
  struct DecoderLayerIds {
    LayerNormIds ln1, ln2, ln3;
    AttentionIds self_attn, cross_attn;
    FeedForwardIds ff;
  };
  struct DecoderTopIds {
    std::vector<DecoderLayerIds> layers;
    LayerNormIds final_norm;
    std::size_t out_w, out_b;
  };

  explicit Model(const ModelConfig& config);
  std::size_t Add(const std::string& name, numerics::Shape shape);
  LayerNormIds AddLayerNorm(const std::string& prefix);
  AttentionIds AddAttention(const std::string& prefix);
  FeedForwardIds AddFeedForward(const std::string& prefix);
  EncoderLayerIds AddEncoderLayer(const std::string& prefix);
  DecoderLayerIds AddDecoderLayer(const std::string& prefix);

  Var P(Tape<T>& tape, std::size_t id) const;
  Var Linear(Tape<T>& tape, Var x, std::size_t w, std::size_t b) const;
  Var Norm(Tape<T>& tape, Var x, const LayerNormIds& ln) const;
  Var FeedForward(Tape<T>& tape, Var x, const FeedForwardIds& ff) const;
  Var DecoderLayer(Tape<T>& tape, Var x, const DecoderLayerIds& layer,
                   Var cross_k, Var cross_v) const;
  Var Embed(Tape<T>& tape, std::span<const int> ids, std::size_t pos_id) const;

  ModelConfig config_;
  std::vector<Parameter<T>> params_;
  std::map<std::string, std::size_t> by_name_;
  std::size_t tok_emb_ = 0, enc_pos_ = 0, dec_pos_ = 0;
  std::vector<EncoderLayerIds> encoder_;
  LayerNormIds encoder_norm_{};
  std::vector<DecoderLayerIds> shared_;
  LayerNormIds shared_norm_{};
  std::vector<DecoderTopIds> tops_;
  std::size_t gate_w_ = 0;

  template <typename U>
  friend class Model;
};

extern template class Model<float>;
extern template class Model<double>;

// Encoder states for one document; input beyond max_positions is dropped and
// flagged.
template <typename T>
EncoderStates<T> EncodeDocument(const Model<T>& model, std::span<const int> ids);

// One StepOutput per prefix position. prefix must start with BOS.
template <typename T>
std::vector<StepOutput<T>> DecoderForward(const Model<T>& model,
                                          const EncoderStates<T>& encoder,
                                          std::span<const int> prefix);

// g = softmax(W^T h_m).
template <typename T>
GateVector GateProbs(const Model<T>& model, std::span<const T> shared_hidden);

// sum_j g_j * P_j, computed in probability space.
std::vector<double> MixtureDistribution(
    const std::vector<std::vector<double>>& per_decoder_probs,
    const GateVector& gate);

// Recording version of MixtureDistribution: gate is T x k, each entry of
// per_decoder_probs is T x vocab.
template <typename T>
Var MixtureOnTape(Tape<T>& tape, const std::vector<Var>& per_decoder_probs,
                  Var gate);

}  // namespace hydra

#endif  // HYDRA_MODEL_H_
