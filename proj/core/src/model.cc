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

#include "hydra/model.h"

#include <cmath>
#include <random>

#include "hydra/error.h"
#include "hydra/tokenizer.h"

namespace hydra {
namespace {

constexpr double kWeightStd = 0.02;
constexpr double kTopNoiseStd = 1e-3;

enum class InitKind { kWeight, kGain, kBias };

InitKind KindOf(const std::string& name) {
  const auto dot = name.rfind('.');
  const std::string leaf = name.substr(dot + 1);
  if (leaf == "g") return InitKind::kGain;
  if (leaf.size() >= 1 && leaf[0] == 'b') return InitKind::kBias;
  return InitKind::kWeight;
}

}  // namespace

void ModelConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) {
    Require(ok, ErrorCode::kConfig, "invalid model config: " + what);
  };
  check(vocab_size > 0, "vocab_size must be positive");
  check(d_model > 0, "d_model must be positive");
  check(n_heads > 0 && d_model % n_heads == 0,
        "d_model " + std::to_string(d_model) + " not divisible by n_heads " +
            std::to_string(n_heads));
  check(decoder_layers > 0, "decoder_layers (M) must be positive");
  check(shared_layers < decoder_layers,
        "shared_layers (m) must be < decoder_layers (M)");
  check(num_decoders >= 1, "num_decoders (k) must be >= 1");
  check(ff_width > 0, "ff_width must be positive");
  check(max_positions >= 2, "max_positions must be >= 2");
}

void GateVector::Validate() const {
  Require(!g.empty(), ErrorCode::kInvalidArgument, "empty gate vector");
  double total = 0.0;
  for (double x : g) {
    Require(std::isfinite(x) && x >= 0.0, ErrorCode::kInvalidArgument,
            "gate entries must be finite and nonnegative");
    total += x;
  }
  Require(std::abs(total - 1.0) <= 1e-6, ErrorCode::kInvalidArgument,
          "gate entries sum to " + std::to_string(total) + ", expected 1");
}

GateVector GateVector::Uniform(std::size_t k) {
  return GateVector{std::vector<double>(k, 1.0 / static_cast<double>(k))};
}

GateVector GateVector::OneHot(std::size_t k, std::size_t j) {
  Require(j < k, ErrorCode::kIndex,
          "decoder " + std::to_string(j) + " out of range for k=" +
              std::to_string(k));
  GateVector gate{std::vector<double>(k, 0.0)};
  gate.g[j] = 1.0;
  return gate;
}

template <typename T>
Model<T>::Model(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const std::size_t d = config_.d_model;
  tok_emb_ = Add("emb.tok", {config_.vocab_size, d});
  enc_pos_ = Add("enc.pos", {config_.max_positions, d});
  dec_pos_ = Add("dec.pos", {config_.max_positions, d});
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    encoder_.push_back(AddEncoderLayer("enc.L" + std::to_string(l) + "."));
  }
  encoder_norm_ = AddLayerNorm("enc.ln.");
  for (std::size_t l = 0; l < config_.shared_layers; ++l) {
    shared_.push_back(AddDecoderLayer("dec.shared.L" + std::to_string(l) + "."));
  }
  shared_norm_ = AddLayerNorm("dec.shared.ln.");
  for (std::size_t j = 0; j < config_.num_decoders; ++j) {
    const std::string prefix = "dec." + std::to_string(j) + ".";
    DecoderTopIds top;
    for (std::size_t l = config_.shared_layers; l < config_.decoder_layers; ++l) {
      top.layers.push_back(AddDecoderLayer(prefix + "L" + std::to_string(l) + "."));
    }
    top.final_norm = AddLayerNorm(prefix + "ln.");
    top.out_w = Add(prefix + "out.w", {d, config_.vocab_size});
    top.out_b = Add(prefix + "out.b", {config_.vocab_size});
    tops_.push_back(std::move(top));
  }
  gate_w_ = Add("gate.W", {d, config_.num_decoders});
}

template <typename T>
std::size_t Model<T>::Add(const std::string& name, numerics::Shape shape) {
  params_.emplace_back(name, Tensor<T>(std::move(shape)));
  by_name_.emplace(name, params_.size() - 1);
  return params_.size() - 1;
}

template <typename T>
typename Model<T>::LayerNormIds Model<T>::AddLayerNorm(const std::string& prefix) {
  const std::size_t d = config_.d_model;
  return {Add(prefix + "g", {d}), Add(prefix + "b", {d})};
}

template <typename T>
typename Model<T>::AttentionIds Model<T>::AddAttention(const std::string& prefix) {
  const std::size_t d = config_.d_model;
  AttentionIds ids{};
  ids.wq = Add(prefix + "wq", {d, d});
  ids.bq = Add(prefix + "bq", {d});
  ids.wk = Add(prefix + "wk", {d, d});
  ids.bk = Add(prefix + "bk", {d});
  ids.wv = Add(prefix + "wv", {d, d});
  ids.bv = Add(prefix + "bv", {d});
  ids.wo = Add(prefix + "wo", {d, d});
  ids.bo = Add(prefix + "bo", {d});
  return ids;
}

template <typename T>
typename Model<T>::FeedForwardIds Model<T>::AddFeedForward(
    const std::string& prefix) {
  const std::size_t d = config_.d_model, f = config_.ff_width;
  FeedForwardIds ids{};
  ids.w1 = Add(prefix + "w1", {d, f});
  ids.b1 = Add(prefix + "b1", {f});
  ids.w2 = Add(prefix + "w2", {f, d});
  ids.b2 = Add(prefix + "b2", {d});
  return ids;
}

template <typename T>
typename Model<T>::EncoderLayerIds Model<T>::AddEncoderLayer(
    const std::string& prefix) {
  EncoderLayerIds layer{};
  layer.ln1 = AddLayerNorm(prefix + "ln1.");
  layer.attn = AddAttention(prefix + "attn.");
  layer.ln2 = AddLayerNorm(prefix + "ln2.");
  layer.ff = AddFeedForward(prefix + "ff.");
  return layer;
}

template <typename T>
typename Model<T>::DecoderLayerIds Model<T>::AddDecoderLayer(
    const std::string& prefix) {
  DecoderLayerIds layer{};
  layer.ln1 = AddLayerNorm(prefix + "ln1.");
  layer.self_attn = AddAttention(prefix + "self.");
  layer.ln2 = AddLayerNorm(prefix + "ln2.");
  layer.cross_attn = AddAttention(prefix + "cross.");
  layer.ln3 = AddLayerNorm(prefix + "ln3.");
  layer.ff = AddFeedForward(prefix + "ff.");
  return layer;
}

template <typename T>
Model<T> Model<T>::Init(const ModelConfig& config, std::uint64_t seed) {
  Model model(config);
  model.config_.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> weight(0.0, kWeightStd);
  std::normal_distribution<double> noise(0.0, kTopNoiseStd);

  auto is_top = [&](const std::string& name, std::size_t j) {
    return name.rfind("dec." + std::to_string(j) + ".", 0) == 0;
  };
  auto is_any_top = [&](const std::string& name) {
    for (std::size_t j = 0; j < config.num_decoders; ++j) {
      if (is_top(name, j)) return true;
    }
    return false;
  };

  // Decoder 0's top is drawn once in registration order; the others copy it.
  for (Parameter<T>& p : model.params_) {
    if (is_any_top(p.name) && !is_top(p.name, 0)) continue;
    auto values = p.value.mutable_data();
    switch (KindOf(p.name)) {
      case InitKind::kGain:
        for (T& v : values) v = T(1);
        break;
      case InitKind::kBias:
        for (T& v : values) v = T(0);
        break;
      case InitKind::kWeight:
        for (T& v : values) v = static_cast<T>(weight(rng));
        break;
    }
  }
  const std::string top0 = "dec.0.";
  for (std::size_t j = 1; j < config.num_decoders; ++j) {
    const std::string topj = "dec." + std::to_string(j) + ".";
    for (Parameter<T>& p : model.params_) {
      if (!is_top(p.name, j)) continue;
      const std::string source = top0 + p.name.substr(topj.size());
      p.value = model.params_[model.by_name_.at(source)].value;
    }
  }
  for (std::size_t j = 0; j < config.num_decoders; ++j) {
    for (Parameter<T>& p : model.params_) {
      if (!is_top(p.name, j)) continue;
      for (T& v : p.value.mutable_data()) v += static_cast<T>(noise(rng));
    }
  }
  return model;
}

template <typename T>
Model<T> Model<T>::FromTensors(const ModelConfig& config,
                               const std::map<std::string, Tensor<T>>& tensors) {
  Model model(config);
  Require(tensors.size() == model.params_.size(), ErrorCode::kValidation,
          "expected " + std::to_string(model.params_.size()) +
              " tensors, got " + std::to_string(tensors.size()));
  for (Parameter<T>& p : model.params_) {
    auto it = tensors.find(p.name);
    Require(it != tensors.end(), ErrorCode::kValidation,
            "missing tensor " + p.name);
    Require(it->second.shape() == p.value.shape(), ErrorCode::kValidation,
            "tensor " + p.name + " has shape " +
                numerics::ShapeString(it->second.shape()) + ", expected " +
                numerics::ShapeString(p.value.shape()));
    p.value = it->second;
  }
  return model;
}

template <typename T>
Parameter<T>& Model<T>::parameter(const std::string& name) {
  auto it = by_name_.find(name);
  Require(it != by_name_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter " + name);
  return params_[it->second];
}

template <typename T>
const Parameter<T>& Model<T>::parameter(const std::string& name) const {
  auto it = by_name_.find(name);
  Require(it != by_name_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter " + name);
  return params_[it->second];
}

template <typename T>
std::size_t Model<T>::num_weights() const {
  std::size_t n = 0;
  for (const Parameter<T>& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void Model<T>::ZeroGrad() const {
  for (const Parameter<T>& p : params_) p.ZeroGrad();
}

template <typename T>
template <typename U>
Model<U> Model<T>::Cast() const {
  Model<U> out(config_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.params_[i].value = params_[i].value.template Cast<U>();
  }
  return out;
}

template <typename T>
Var Model<T>::P(Tape<T>& tape, std::size_t id) const {
  return tape.records_gradients() ? tape.Param(params_[id])
                                  : tape.View(params_[id].value);
}

template <typename T>
Var Model<T>::Linear(Tape<T>& tape, Var x, std::size_t w, std::size_t b) const {
  return tape.AddBias(tape.MatMul(x, P(tape, w)), P(tape, b));
}

template <typename T>
Var Model<T>::Norm(Tape<T>& tape, Var x, const LayerNormIds& ln) const {
  return tape.LayerNorm(x, P(tape, ln.gain), P(tape, ln.bias));
}

template <typename T>
Var Model<T>::FeedForward(Tape<T>& tape, Var x, const FeedForwardIds& ff) const {
  return Linear(tape, tape.Gelu(Linear(tape, x, ff.w1, ff.b1)), ff.w2, ff.b2);
}

template <typename T>
Var Model<T>::Embed(Tape<T>& tape, std::span<const int> ids,
                    std::size_t pos_id) const {
  Var tokens = tape.Embedding(P(tape, tok_emb_), ids);
  Var positions = tape.SliceRows(P(tape, pos_id), 0, ids.size());
  return tape.Add(tokens, positions);
}

template <typename T>
Var Model<T>::DecoderLayer(Tape<T>& tape, Var x, const DecoderLayerIds& layer,
                           Var cross_k, Var cross_v) const {
  const std::size_t heads = config_.n_heads;
  const std::size_t n = tape.rows(x);
  {
    Var h = Norm(tape, x, layer.ln1);
    const AttentionIds& a = layer.self_attn;
    Var att = tape.Attention(Linear(tape, h, a.wq, a.bq),
                             Linear(tape, h, a.wk, a.bk),
                             Linear(tape, h, a.wv, a.bv), heads,
                             numerics::AttentionMask::Causal(n));
    x = tape.Add(x, Linear(tape, att, a.wo, a.bo));
  }
  {
    Var h = Norm(tape, x, layer.ln2);
    const AttentionIds& a = layer.cross_attn;
    Var att = tape.Attention(Linear(tape, h, a.wq, a.bq), cross_k, cross_v,
                             heads, numerics::AttentionMask());
    x = tape.Add(x, Linear(tape, att, a.wo, a.bo));
  }
  return tape.Add(x, FeedForward(tape, Norm(tape, x, layer.ln3), layer.ff));
}

template <typename T>
Var Model<T>::Encode(Tape<T>& tape, std::span<const int> ids) const {
  Require(!ids.empty(), ErrorCode::kInvalidArgument, "empty encoder input");
  ids = ids.first(EncoderInputLength(ids.size()));
  Var x = Embed(tape, ids, enc_pos_);
  for (const EncoderLayerIds& layer : encoder_) {
    Var h = Norm(tape, x, layer.ln1);
    const AttentionIds& a = layer.attn;
    Var att = tape.Attention(Linear(tape, h, a.wq, a.bq),
                             Linear(tape, h, a.wk, a.bk),
                             Linear(tape, h, a.wv, a.bv), config_.n_heads,
                             numerics::AttentionMask());
    x = tape.Add(x, Linear(tape, att, a.wo, a.bo));
    x = tape.Add(x, FeedForward(tape, Norm(tape, x, layer.ln2), layer.ff));
  }
  return Norm(tape, x, encoder_norm_);
}

namespace {

void CheckPrefix(std::span<const int> prefix, std::size_t max_positions) {
  Require(!prefix.empty() && prefix[0] == kBosId, ErrorCode::kInvalidArgument,
          "decoder prefix must start with BOS");
  Require(prefix.size() <= max_positions, ErrorCode::kInvalidArgument,
          "decoder prefix of " + std::to_string(prefix.size()) +
              " exceeds max_positions " + std::to_string(max_positions));
}

}  // namespace

template <typename T>
DecoderPass Model<T>::Decode(Tape<T>& tape, Var encoder_states,
                             std::span<const int> prefix) const {
  CheckPrefix(prefix, config_.max_positions);
  Var x = Embed(tape, prefix, dec_pos_);
  auto cross = [&](const DecoderLayerIds& layer) {
    const AttentionIds& a = layer.cross_attn;
    return std::make_pair(Linear(tape, encoder_states, a.wk, a.bk),
                          Linear(tape, encoder_states, a.wv, a.bv));
  };
  for (const DecoderLayerIds& layer : shared_) {
    auto [k, v] = cross(layer);
    x = DecoderLayer(tape, x, layer, k, v);
  }
  DecoderPass pass;
  pass.shared_hidden = Norm(tape, x, shared_norm_);
  for (const DecoderTopIds& top : tops_) {
    Var y = pass.shared_hidden;
    for (const DecoderLayerIds& layer : top.layers) {
      auto [k, v] = cross(layer);
      y = DecoderLayer(tape, y, layer, k, v);
    }
    y = Norm(tape, y, top.final_norm);
    pass.logits.push_back(Linear(tape, y, top.out_w, top.out_b));
  }
  return pass;
}

template <typename T>
Var Model<T>::Gate(Tape<T>& tape, Var shared_hidden) const {
  return tape.SoftmaxRows(tape.MatMul(shared_hidden, P(tape, gate_w_)));
}

template <typename T>
typename Model<T>::CrossCache Model<T>::BuildCrossCache(
    const Tensor<T>& encoder_states) const {
  Tape<T> tape(false);
  Var enc = tape.View(encoder_states);
  CrossCache cache;
  auto project = [&](const DecoderLayerIds& layer, std::vector<Tensor<T>>& ks,
                     std::vector<Tensor<T>>& vs) {
    const AttentionIds& a = layer.cross_attn;
    ks.push_back(tape.Value(Linear(tape, enc, a.wk, a.bk)));
    vs.push_back(tape.Value(Linear(tape, enc, a.wv, a.bv)));
  };
  for (const DecoderLayerIds& layer : shared_) {
    project(layer, cache.shared_keys, cache.shared_values);
  }
  cache.top_keys.resize(tops_.size());
  cache.top_values.resize(tops_.size());
  for (std::size_t j = 0; j < tops_.size(); ++j) {
    for (const DecoderLayerIds& layer : tops_[j].layers) {
      project(layer, cache.top_keys[j], cache.top_values[j]);
    }
  }
  return cache;
}

template <typename T>
DecoderPass Model<T>::DecodeCached(Tape<T>& tape, const CrossCache& cache,
                                   std::span<const int> prefix,
                                   std::size_t first_row) const {
  CheckPrefix(prefix, config_.max_positions);
  Require(first_row < prefix.size(), ErrorCode::kIndex,
          "first_row beyond prefix");
  Var x = Embed(tape, prefix, dec_pos_);
  for (std::size_t l = 0; l < shared_.size(); ++l) {
    x = DecoderLayer(tape, x, shared_[l], tape.View(cache.shared_keys[l]),
                     tape.View(cache.shared_values[l]));
  }
  DecoderPass pass;
  pass.shared_hidden = Norm(tape, x, shared_norm_);
  const std::size_t n = prefix.size();
  for (std::size_t j = 0; j < tops_.size(); ++j) {
    const DecoderTopIds& top = tops_[j];
    Var y = pass.shared_hidden;
    for (std::size_t l = 0; l < top.layers.size(); ++l) {
      y = DecoderLayer(tape, y, top.layers[l], tape.View(cache.top_keys[j][l]),
                       tape.View(cache.top_values[j][l]));
    }
    if (first_row > 0) y = tape.SliceRows(y, first_row, n - first_row);
    y = Norm(tape, y, top.final_norm);
    pass.logits.push_back(Linear(tape, y, top.out_w, top.out_b));
  }
  return pass;
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::Cast<double>() const;
template Model<float> Model<double>::Cast<float>() const;
template Model<float> Model<float>::Cast<float>() const;
template Model<double> Model<double>::Cast<double>() const;

template <typename T>
EncoderStates<T> EncodeDocument(const Model<T>& model, std::span<const int> ids) {
  Tape<T> tape(false);
  Var states = model.Encode(tape, ids);
  EncoderStates<T> out;
  out.states = tape.Value(states);
  out.original_length = ids.size();
  out.truncated = ids.size() > model.config().max_positions;
  return out;
}

template <typename T>
std::vector<StepOutput<T>> DecoderForward(const Model<T>& model,
                                          const EncoderStates<T>& encoder,
                                          std::span<const int> prefix) {
  const auto cache = model.BuildCrossCache(encoder.states);
  Tape<T> tape(false);
  const DecoderPass pass = model.DecodeCached(tape, cache, prefix, 0);
  std::vector<StepOutput<T>> steps(prefix.size());
  const Tensor<T> hidden = tape.Value(pass.shared_hidden);
  std::vector<Tensor<T>> logits;
  for (Var v : pass.logits) logits.push_back(tape.Value(v));
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto h = hidden.row(i);
    steps[i].shared_hidden.assign(h.begin(), h.end());
    for (const Tensor<T>& l : logits) {
      steps[i].per_decoder_logprobs.push_back(numerics::LogSoftmax(l.row(i)));
    }
  }
  return steps;
}

template <typename T>
GateVector GateProbs(const Model<T>& model, std::span<const T> shared_hidden) {
  const std::size_t d = model.config().d_model;
  const std::size_t k = model.num_decoders();
  Require(shared_hidden.size() == d, ErrorCode::kInvalidArgument,
          "hidden state has " + std::to_string(shared_hidden.size()) +
              " entries, expected " + std::to_string(d));
  const Tensor<T>& w = model.parameter("gate.W").value;
  std::vector<T> logits(k, T(0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) logits[j] += shared_hidden[i] * w.at(i, j);
  }
  const std::vector<T> probs = numerics::Softmax<T>(logits);
  return GateVector{std::vector<double>(probs.begin(), probs.end())};
}

std::vector<double> MixtureDistribution(
    const std::vector<std::vector<double>>& per_decoder_probs,
    const GateVector& gate) {
  Require(!per_decoder_probs.empty(), ErrorCode::kInvalidArgument,
          "mixture over zero distributions");
  Require(gate.g.size() == per_decoder_probs.size(),
          ErrorCode::kInvalidArgument,
          "gate has " + std::to_string(gate.g.size()) + " entries for " +
              std::to_string(per_decoder_probs.size()) + " distributions");
  gate.Validate();
  const std::size_t vocab = per_decoder_probs[0].size();
  for (const auto& p : per_decoder_probs) {
    Require(p.size() == vocab, ErrorCode::kInvalidArgument,
            "distributions differ in vocabulary size");
  }
  std::vector<double> out(vocab, 0.0);
  for (std::size_t j = 0; j < per_decoder_probs.size(); ++j) {
    const double gj = gate.g[j];
    for (std::size_t v = 0; v < vocab; ++v) out[v] += gj * per_decoder_probs[j][v];
  }
  return out;
}

template <typename T>
Var MixtureOnTape(Tape<T>& tape, const std::vector<Var>& per_decoder_probs,
                  Var gate) {
  Require(!per_decoder_probs.empty(), ErrorCode::kInvalidArgument,
          "mixture over zero distributions");
  Require(tape.cols(gate) == per_decoder_probs.size(),
          ErrorCode::kInvalidArgument, "gate width does not match decoders");
  Var mix = tape.ScaleRows(per_decoder_probs[0], tape.Column(gate, 0));
  for (std::size_t j = 1; j < per_decoder_probs.size(); ++j) {
    mix = tape.Add(mix, tape.ScaleRows(per_decoder_probs[j], tape.Column(gate, j)));
  }
  return mix;
}

template EncoderStates<float> EncodeDocument(const Model<float>&,
                                             std::span<const int>);
template EncoderStates<double> EncodeDocument(const Model<double>&,
                                              std::span<const int>);
template std::vector<StepOutput<float>> DecoderForward(
    const Model<float>&, const EncoderStates<float>&, std::span<const int>);
template std::vector<StepOutput<double>> DecoderForward(
    const Model<double>&, const EncoderStates<double>&, std::span<const int>);
template GateVector GateProbs(const Model<float>&, std::span<const float>);
template GateVector GateProbs(const Model<double>&, std::span<const double>);
template Var MixtureOnTape(Tape<float>&, const std::vector<Var>&, Var);
template Var MixtureOnTape(Tape<double>&, const std::vector<Var>&, Var);

}  // namespace hydra
