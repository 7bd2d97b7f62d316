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

#include "hydra/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hydra/error.h"

namespace hydra {

Feature ParseFeature(std::string_view name) {
  if (name == "abstractiveness") return Feature::kAbstractiveness;
  if (name == "specificity") return Feature::kSpecificity;
  Fail(ErrorCode::kConfig, "unsupported feature '" + std::string(name) + "'");
}

GateLevel ParseGateLevel(std::string_view name) {
  if (name == "summary") return GateLevel::kSummary;
  if (name == "sentence") return GateLevel::kSentence;
  Fail(ErrorCode::kConfig, "unknown gate level '" + std::string(name) + "'");
}

TrainMode ParseTrainMode(std::string_view name) {
  if (name == "unguided") return TrainMode::kUnguided;
  if (name == "guided") return TrainMode::kGuided;
  Fail(ErrorCode::kConfig, "unknown training mode '" + std::string(name) + "'");
}

std::string FeatureName(Feature feature) {
  return feature == Feature::kAbstractiveness ? "abstractiveness" : "specificity";
}

std::string GateLevelName(GateLevel level) {
  return level == GateLevel::kSummary ? "summary" : "sentence";
}

std::string TrainModeName(TrainMode mode) {
  return mode == TrainMode::kUnguided ? "unguided" : "guided";
}

void SplitConfig::Validate() const {
  Require(buckets >= 2, ErrorCode::kConfig, "need at least 2 buckets");
}

namespace {

double UnitScore(std::string_view article, std::string_view text, Feature feature,
                 const metrics::SpecificityScorer& scorer) {
  try {
    if (feature == Feature::kAbstractiveness) {
      return metrics::NgramOverlap(article, text, 2);
    }
    return metrics::SummarySpecificity(text, scorer);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedMetric) throw;
    return 0.0;
  }
}

const metrics::LexicalSpecificityScorer& DefaultScorer() {
  static const metrics::LexicalSpecificityScorer scorer;
  return scorer;
}

}  // namespace

double ComputeFeature(const Example& example, Feature feature,
                      const metrics::SpecificityScorer& scorer) {
  if (feature == Feature::kAbstractiveness) {
    return metrics::NgramOverlap(example.article, example.summary, 2);
  }
  return metrics::SummarySpecificity(example.summary, scorer);
}

double ComputeFeature(const Example& example, Feature feature) {
  return ComputeFeature(example, feature, DefaultScorer());
}

Corpus PercentileSplit(const Corpus& corpus, const SplitConfig& config,
                       const metrics::SpecificityScorer& scorer) {
  config.Validate();
  Corpus out = corpus;
  struct Unit {
    std::size_t example;
    std::size_t sentence;
    double score;
  };
  std::vector<Unit> units;
  for (std::size_t i = 0; i < out.examples.size(); ++i) {
    Example& ex = out.examples[i];
    ex.gate.reset();
    ex.sentence_gates.clear();
    if (config.level == GateLevel::kSummary) {
      units.push_back({i, 0, UnitScore(ex.article, ex.summary, config.feature, scorer)});
    } else {
      const std::vector<std::string> sentences = SplitSentences(ex.summary);
      ex.sentence_gates.assign(sentences.size(), 0.0);
      for (std::size_t s = 0; s < sentences.size(); ++s) {
        units.push_back(
            {i, s, UnitScore(ex.article, sentences[s], config.feature, scorer)});
      }
    }
  }
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return units[a].score < units[b].score;
  });
  const std::size_t n = config.buckets;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Unit& u = units[order[rank]];
    const std::size_t bucket = rank * n / order.size();
    const double gate = static_cast<double>(bucket) / static_cast<double>(n - 1);
    Example& ex = out.examples[u.example];
    if (config.level == GateLevel::kSummary) {
      ex.gate = gate;
    } else {
      ex.sentence_gates[u.sentence] = gate;
    }
  }
  return out;
}

Corpus PercentileSplit(const Corpus& corpus, const SplitConfig& config) {
  return PercentileSplit(corpus, config, DefaultScorer());
}

TokenizedExample Tokenize(const Example& example, const Vocabulary& vocabulary) {
  TokenizedExample out;
  out.article = vocabulary.Encode(example.article);
  out.summary = vocabulary.Encode(example.summary);
  const std::size_t targets = out.summary.size() - 1;
  if (example.gate) {
    out.token_gates.assign(targets, *example.gate);
  } else if (!example.sentence_gates.empty()) {
    const std::vector<std::string> sentences = SplitSentences(example.summary);
    Require(sentences.size() == example.sentence_gates.size(),
            ErrorCode::kInvalidArgument,
            "example '" + example.id + "' has " +
                std::to_string(example.sentence_gates.size()) +
                " sentence gates for " + std::to_string(sentences.size()) +
                " sentences");
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const std::size_t n = vocabulary.EncodeWords(sentences[s]).size();
      out.token_gates.insert(out.token_gates.end(), n, example.sentence_gates[s]);
    }
    Require(out.token_gates.size() + 1 == targets, ErrorCode::kInvalidArgument,
            "sentence split of example '" + example.id +
                "' does not cover its tokens");
    out.token_gates.push_back(example.sentence_gates.back());
  }
  return out;
}

std::vector<TokenizedExample> Tokenize(const Corpus& corpus,
                                       const Vocabulary& vocabulary) {
  std::vector<TokenizedExample> out;
  out.reserve(corpus.size());
  for (const Example& ex : corpus.examples) out.push_back(Tokenize(ex, vocabulary));
  return out;
}

namespace {

struct Targets {
  std::span<const int> prefix;
  std::vector<int> next;
};

template <typename T>
Targets SplitTargets(const Model<T>& model, const TokenizedExample& example) {
  Require(example.summary.size() >= 2 && example.summary.front() == kBosId,
          ErrorCode::kInvalidArgument, "summary must be [BOS, ..., EOS]");
  const std::size_t n =
      std::min(example.summary.size() - 1, model.config().max_positions);
  Targets t;
  t.prefix = std::span<const int>(example.summary).first(n);
  t.next.assign(example.summary.begin() + 1, example.summary.begin() + 1 + n);
  return t;
}

}  // namespace

template <typename T>
Var ExampleLoss(Tape<T>& tape, const Model<T>& model,
                const TokenizedExample& example, TrainMode mode) {
  const Targets t = SplitTargets(model, example);
  const std::size_t k = model.num_decoders();
  Var gate;
  if (mode == TrainMode::kGuided) {
    Require(k == 2, ErrorCode::kUnsupportedConfiguration,
            "guided training needs exactly 2 decoders, model has " +
                std::to_string(k));
    Require(example.token_gates.size() + 1 == example.summary.size(),
            ErrorCode::kInvalidArgument, "guided training needs oracle gates");
    std::vector<T> g;
    for (std::size_t i = 0; i < t.next.size(); ++i) {
      g.push_back(T(1) - static_cast<T>(example.token_gates[i]));
      g.push_back(static_cast<T>(example.token_gates[i]));
    }
    gate = tape.Constant(t.next.size(), 2, std::move(g));
  }
  const Var enc = model.Encode(tape, example.article);
  const DecoderPass pass = model.Decode(tape, enc, t.prefix);
  if (mode == TrainMode::kUnguided) gate = model.Gate(tape, pass.shared_hidden);
  std::vector<Var> probs;
  for (Var logits : pass.logits) probs.push_back(tape.SoftmaxRows(logits));
  const Var mixture = MixtureOnTape(tape, probs, gate);
  const Var picked = tape.Gather(mixture, t.next);
  return tape.Scale(tape.Sum(tape.Log(picked)), T(-1));
}

namespace {

template <typename T, typename PerExample>
T BatchMean(const Model<T>& model, std::span<const TokenizedExample> batch,
            bool compute_gradients, PerExample per_example) {
  Require(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  Tape<T> tape(compute_gradients);
  Var total;
  for (const TokenizedExample& ex : batch) {
    const Var loss = per_example(tape, ex);
    total = total.valid() ? tape.Add(total, loss) : loss;
  }
  const Var mean = tape.Scale(total, T(1) / static_cast<T>(batch.size()));
  if (compute_gradients) {
    model.ZeroGrad();
    tape.Backward(mean);
  }
  return tape.Scalar(mean);
}

}  // namespace

template <typename T>
T UnguidedLoss(const Model<T>& model, std::span<const TokenizedExample> batch,
               bool compute_gradients) {
  return BatchMean(model, batch, compute_gradients,
                   [&](Tape<T>& tape, const TokenizedExample& ex) {
                     return ExampleLoss(tape, model, ex, TrainMode::kUnguided);
                   });
}

template <typename T>
T GuidedLoss(const Model<T>& model, std::span<const TokenizedExample> batch,
             bool compute_gradients) {
  return BatchMean(model, batch, compute_gradients,
                   [&](Tape<T>& tape, const TokenizedExample& ex) {
                     return ExampleLoss(tape, model, ex, TrainMode::kGuided);
                   });
}

template <typename T>
T DecoderCrossEntropy(const Model<T>& model,
                      std::span<const TokenizedExample> batch,
                      std::size_t decoder, bool compute_gradients) {
  Require(decoder < model.num_decoders(), ErrorCode::kIndex,
          "decoder " + std::to_string(decoder) + " out of range");
  return BatchMean(model, batch, compute_gradients,
                   [&](Tape<T>& tape, const TokenizedExample& ex) {
                     const Targets t = SplitTargets(model, ex);
                     const Var enc = model.Encode(tape, ex.article);
                     const DecoderPass pass = model.Decode(tape, enc, t.prefix);
                     const Var logp = tape.LogSoftmaxRows(pass.logits[decoder]);
                     return tape.Scale(tape.Sum(tape.Gather(logp, t.next)), T(-1));
                   });
}

TrainConfig TrainConfig::Desk() { return TrainConfig{}; }

TrainConfig TrainConfig::Paper(Feature feature) {
  TrainConfig c;
  c.learning_rate = feature == Feature::kSpecificity ? 2e-5 : 1e-5;
  c.batch_size = 64;
  c.epochs = 3;
  return c;
}

void TrainConfig::Validate() const {
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorCode::kConfig,
          "learning rate must be a finite nonnegative number");
  Require(batch_size > 0, ErrorCode::kConfig, "batch size must be positive");
  Require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
          ErrorCode::kConfig, "Adam betas must lie in [0, 1)");
  Require(epsilon > 0.0, ErrorCode::kConfig, "Adam epsilon must be positive");
  Require(max_grad_norm > 0.0, ErrorCode::kConfig, "max gradient norm must be positive");
  Require(weight_decay >= 0.0, ErrorCode::kConfig, "weight decay must be nonnegative");
}

std::vector<EpochLog> Train(Model<float>& model,
                            std::span<const TokenizedExample> examples,
                            const TrainConfig& config,
                            const std::function<void(const EpochLog&)>& on_epoch) {
  config.Validate();
  Require(!examples.empty(), ErrorCode::kInvalidArgument, "no training examples");
  if (config.mode == TrainMode::kGuided) {
    Require(model.num_decoders() == 2, ErrorCode::kUnsupportedConfiguration,
            "guided training needs exactly 2 decoders");
  }
  model.set_guided(config.mode == TrainMode::kGuided);

  auto& params = model.parameters();
  std::vector<std::vector<float>> m(params.size()), v(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    m[p].assign(params[p].value.size(), 0.0f);
    v[p].assign(params[p].value.size(), 0.0f);
  }

  const std::size_t n = examples.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<EpochLog> logs;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t tokens = 0;
    const double epoch_lr =
        config.learning_rate * (1.0 - static_cast<double>(step) / total_steps);
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++step) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      Tape<float> tape(true);
      Var total;
      for (std::size_t i = begin; i < end; ++i) {
        const TokenizedExample& ex = examples[order[i]];
        const Var loss = ExampleLoss(tape, model, ex, config.mode);
        total = total.valid() ? tape.Add(total, loss) : loss;
        tokens += std::min(ex.summary.size() - 1, model.config().max_positions);
      }
      const Var mean = tape.Scale(total, 1.0f / static_cast<float>(end - begin));
      const double batch_loss = tape.Scalar(mean);
      if (!std::isfinite(batch_loss)) {
        Fail(ErrorCode::kDivergence, "loss became " + std::to_string(batch_loss) +
                                         " at epoch " + std::to_string(epoch + 1) +
                                         ", step " + std::to_string(step + 1));
      }
      loss_sum += batch_loss * static_cast<double>(end - begin);
      model.ZeroGrad();
      tape.Backward(mean);

      double sq = 0.0;
      for (const auto& p : params) {
        for (float g : p.grad.data()) sq += static_cast<double>(g) * g;
      }
      const double norm = std::sqrt(sq);
      const double clip =
          norm > config.max_grad_norm ? config.max_grad_norm / (norm + 1e-6) : 1.0;
      const double lr =
          config.learning_rate * (1.0 - static_cast<double>(step) / total_steps);
      const double t = static_cast<double>(step + 1);
      const double c1 = 1.0 - std::pow(config.beta1, t);
      const double c2 = 1.0 - std::pow(config.beta2, t);
      for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p].requires_grad) continue;
        std::span<float> w = params[p].value.mutable_data();
        std::span<const float> g = params[p].grad.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
          const double gi = g[i] * clip;
          m[p][i] = static_cast<float>(config.beta1 * m[p][i] + (1.0 - config.beta1) * gi);
          v[p][i] = static_cast<float>(config.beta2 * v[p][i] +
                                       (1.0 - config.beta2) * gi * gi);
          const double update = (m[p][i] / c1) / (std::sqrt(v[p][i] / c2) + config.epsilon) +
                                config.weight_decay * w[i];
          w[i] = static_cast<float>(w[i] - lr * update);
        }
      }
    }
    EpochLog log;
    log.epoch = epoch + 1;
    log.loss_per_example = loss_sum / static_cast<double>(n);
    log.loss_per_token = loss_sum / static_cast<double>(tokens);
    log.learning_rate = epoch_lr;
    logs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  model.ZeroGrad();
  return logs;
}

#define HYDRA_INSTANTIATE(T)                                                     \
  template Var ExampleLoss<T>(Tape<T>&, const Model<T>&,                          \
                              const TokenizedExample&, TrainMode);                \
  template T UnguidedLoss<T>(const Model<T>&, std::span<const TokenizedExample>, \
                             bool);                                               \
  template T GuidedLoss<T>(const Model<T>&, std::span<const TokenizedExample>,   \
                           bool);                                                 \
  template T DecoderCrossEntropy<T>(const Model<T>&,                              \
                                    std::span<const TokenizedExample>,            \
                                    std::size_t, bool);

HYDRA_INSTANTIATE(float)
HYDRA_INSTANTIATE(double)

#undef HYDRA_INSTANTIATE

}  // namespace hydra
