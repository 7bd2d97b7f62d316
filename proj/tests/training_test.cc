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

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hydra/corpus.h"
#include "hydra/tokenizer.h"
#include "hydra/training.h"
#include "test_util.h"

namespace hydra {
namespace {

using testing::CodeOf;

ModelConfig Tiny(std::size_t vocab, std::size_t k = 2) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.d_model = 8;
  c.n_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 2;
  c.shared_layers = 1;
  c.num_decoders = k;
  c.ff_width = 16;
  c.max_positions = 16;
  return c;
}

Example MakeExample(std::string id, std::string article, std::string summary) {
  Example e;
  e.id = std::move(id);
  e.article = std::move(article);
  e.summary = std::move(summary);
  return e;
}

TokenizedExample Toy(std::vector<int> article, std::vector<int> summary, double gate) {
  TokenizedExample t{std::move(article), std::move(summary), {}};
  t.token_gates.assign(t.summary.size() - 1, gate);
  return t;
}

std::vector<TokenizedExample> ToyBatch() {
  return {Toy({kBosId, 4, 5, 6, kEosId}, {kBosId, 7, 8, kEosId}, 0.0),
          Toy({kBosId, 6, 9, kEosId}, {kBosId, 9, 4, 5, kEosId}, 0.0)};
}

TEST(ComputeFeature, AbstractivenessExamples) {
  EXPECT_DOUBLE_EQ(ComputeFeature(MakeExample("a", "x the cat sat y", "the cat sat"),
                                  Feature::kAbstractiveness), 1.0);
  EXPECT_DOUBLE_EQ(ComputeFeature(MakeExample("b", "a b c", "x y z"),
                                  Feature::kAbstractiveness), 0.0);
  EXPECT_DOUBLE_EQ(ComputeFeature(MakeExample("c", "a b c d", "a b x c d"),
                                  Feature::kAbstractiveness), 0.5);
}

TEST(ParseNames, RejectUnknown) {
  EXPECT_EQ(ParseFeature("specificity"), Feature::kSpecificity);
  EXPECT_EQ(ParseTrainMode("guided"), TrainMode::kGuided);
  EXPECT_EQ(CodeOf([] { ParseFeature("fluency"); }), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf([] { ParseGateLevel("word"); }), ErrorCode::kConfig);
}

Corpus ScoredCorpus(const std::vector<int>& copied_words) {
  // Summary i copies copied_words[i] of its 10 words from the article, so
  // its bigram overlap is monotone in that count.
  Corpus c;
  for (std::size_t i = 0; i < copied_words.size(); ++i) {
    std::string summary;
    for (int w = 0; w < 10; ++w) {
      summary += w < copied_words[i] ? "a" + std::to_string(w) : "z" + std::to_string(w);
      summary += " ";
    }
    std::string article;
    for (int w = 0; w < 10; ++w) article += "a" + std::to_string(w) + " ";
    c.examples.push_back(MakeExample("e" + std::to_string(i), article, summary));
  }
  return c;
}

TEST(PercentileSplit, FiveBucketGateSet) {
  const Corpus c = ScoredCorpus({10, 0, 5, 3, 8, 1, 9, 2, 7, 6});
  const Corpus split = PercentileSplit(c, SplitConfig{});
  std::set<double> gates;
  for (const auto& e : split.examples) gates.insert(*e.gate);
  EXPECT_EQ(gates, (std::set<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(PercentileSplit, TwoUnitsPerBucketLowestGetZero) {
  const Corpus c = ScoredCorpus({10, 0, 5, 3, 8, 1, 9, 2, 7, 6});
  const Corpus split = PercentileSplit(c, SplitConfig{});
  std::map<double, int> sizes;
  for (const auto& e : split.examples) ++sizes[*e.gate];
  for (const auto& [g, n] : sizes) EXPECT_EQ(n, 2) << g;
  EXPECT_EQ(*split.examples[1].gate, 0.0);  // 0 copied words
  EXPECT_EQ(*split.examples[5].gate, 0.0);  // 1 copied word
  EXPECT_EQ(*split.examples[0].gate, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double fi = ComputeFeature(c.examples[i], Feature::kAbstractiveness);
      const double fj = ComputeFeature(c.examples[j], Feature::kAbstractiveness);
      if (fi < fj) EXPECT_LE(*split.examples[i].gate, *split.examples[j].gate);
    }
  }
}

TEST(PercentileSplit, EqualScoresGiveBalancedBuckets) {
  const Corpus c = ScoredCorpus(std::vector<int>(13, 4));
  const Corpus split = PercentileSplit(c, SplitConfig{});
  std::map<double, int> sizes;
  for (const auto& e : split.examples) ++sizes[*e.gate];
  ASSERT_EQ(sizes.size(), 5u);
  int lo = 100, hi = 0;
  for (const auto& [g, n] : sizes) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  EXPECT_LE(hi - lo, 1);
  EXPECT_EQ(*split.examples.front().gate, 0.0);
  EXPECT_EQ(*split.examples.back().gate, 1.0);
}

TEST(PercentileSplit, SentenceLevelSpecificity) {
  Corpus c;
  c.examples.push_back(MakeExample("s", "x", "it was calm. Mayor Alba met 3 aides in 2019."));
  c.examples.push_back(MakeExample("t", "x", "the day went on. Reports came from 12 towns."));
  const Corpus split = PercentileSplit(
      c, SplitConfig{Feature::kSpecificity, 2, GateLevel::kSentence});
  for (const auto& e : split.examples) {
    ASSERT_EQ(e.sentence_gates.size(), 2u);
    EXPECT_FALSE(e.gate.has_value());
    EXPECT_EQ(e.sentence_gates[0], 0.0);
    EXPECT_EQ(e.sentence_gates[1], 1.0);
  }
  EXPECT_EQ(CodeOf([] { SplitConfig{Feature::kSpecificity, 1, GateLevel::kSentence}.Validate(); }),
            ErrorCode::kConfig);
}

TEST(Tokenize, SentenceGatesFollowTokens) {
  const std::vector<std::string> texts = {"a b . c d e .", "x"};
  const Vocabulary vocab = Vocabulary::Build(texts, 1);
  Example e = MakeExample("s", "x", "a b . c d e .");
  e.sentence_gates = {0.0, 1.0};
  const TokenizedExample t = Tokenize(e, vocab);
  ASSERT_EQ(t.token_gates.size(), t.summary.size() - 1);
  EXPECT_EQ(t.token_gates, (std::vector<double>{0, 0, 0, 1, 1, 1, 1, 1}));
  e.sentence_gates = {0.0};
  EXPECT_EQ(CodeOf([&] { Tokenize(e, vocab); }), ErrorCode::kInvalidArgument);
}

TEST(UnguidedLoss, SingleDecoderEqualsCrossEntropy) {
  const Model<double> m = Model<float>::Init(Tiny(12, 1), 3).Cast<double>();
  const auto batch = ToyBatch();
  EXPECT_NEAR(UnguidedLoss(m, std::span<const TokenizedExample>(batch)),
              DecoderCrossEntropy(m, std::span<const TokenizedExample>(batch), 0), 1e-12);
}

TEST(UnguidedLoss, DuplicatedExampleMatchesSingle) {
  const Model<double> m = Model<float>::Init(Tiny(12), 3).Cast<double>();
  const auto batch = ToyBatch();
  const std::vector<TokenizedExample> one = {batch[0]};
  const std::vector<TokenizedExample> two = {batch[0], batch[0]};
  EXPECT_NEAR(UnguidedLoss(m, std::span<const TokenizedExample>(one)),
              UnguidedLoss(m, std::span<const TokenizedExample>(two)), 1e-12);
  EXPECT_EQ(CodeOf([&] { UnguidedLoss(m, std::span<const TokenizedExample>()); }),
            ErrorCode::kInvalidArgument);
}

TEST(UnguidedLoss, HandEvaluatedTwoTokenCase) {
  const Model<double> m = Model<float>::Init(Tiny(12), 5).Cast<double>();
  const std::vector<int> article = {kBosId, 4, 5, kEosId};
  const std::vector<TokenizedExample> batch = {Toy(article, {kBosId, 7, kEosId}, 0.0)};
  const auto enc = EncodeDocument(m, article);
  const auto steps = DecoderForward(m, enc, std::vector<int>{kBosId, 7});
  const int targets[] = {7, kEosId};
  double expected = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const GateVector g = GateProbs<double>(m, steps[i].shared_hidden);
    double p = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
      p += g.g[j] * std::exp(steps[i].per_decoder_logprobs[j][targets[i]]);
    }
    expected -= std::log(p);
  }
  EXPECT_NEAR(UnguidedLoss(m, std::span<const TokenizedExample>(batch)), expected, 1e-10);
}

TEST(GuidedLoss, ConstantGatesReduceToOneDecoder) {
  const Model<double> m = Model<float>::Init(Tiny(12), 3).Cast<double>();
  auto batch = ToyBatch();
  const std::span<const TokenizedExample> view(batch);
  EXPECT_NEAR(GuidedLoss(m, view), DecoderCrossEntropy(m, view, 0), 1e-6);
  for (auto& t : batch) t.token_gates.assign(t.token_gates.size(), 1.0);
  EXPECT_NEAR(GuidedLoss(m, view), DecoderCrossEntropy(m, view, 1), 1e-6);
}

TEST(GuidedLoss, HalfGateWithIdenticalDecoders) {
  const Model<double> base = Model<float>::Init(Tiny(12), 3).Cast<double>();
  std::map<std::string, Tensor<double>> tensors;
  for (const auto& p : base.parameters()) tensors[p.name] = p.value;
  for (auto& [name, t] : tensors) {
    if (name.starts_with("dec.1.")) t = tensors.at("dec.0." + name.substr(6));
  }
  const Model<double> m = Model<double>::FromTensors(base.config(), tensors);
  auto batch = ToyBatch();
  for (auto& t : batch) t.token_gates.assign(t.token_gates.size(), 0.5);
  const std::span<const TokenizedExample> view(batch);
  EXPECT_NEAR(GuidedLoss(m, view), DecoderCrossEntropy(m, view, 0), 1e-9);
}

TEST(GuidedLoss, Errors) {
  const Model<double> k3 = Model<float>::Init(Tiny(12, 3), 3).Cast<double>();
  const auto batch = ToyBatch();
  EXPECT_EQ(CodeOf([&] { GuidedLoss(k3, std::span<const TokenizedExample>(batch)); }),
            ErrorCode::kUnsupportedConfiguration);
  const Model<double> m = Model<float>::Init(Tiny(12), 3).Cast<double>();
  auto missing = ToyBatch();
  missing[1].token_gates.clear();
  EXPECT_EQ(CodeOf([&] { GuidedLoss(m, std::span<const TokenizedExample>(missing)); }),
            ErrorCode::kInvalidArgument);
}

TEST(GuidedLoss, ZeroGateLeavesDecoderOneGradientsZero) {
  const Model<double> m = Model<float>::Init(Tiny(12), 3).Cast<double>();
  const auto batch = ToyBatch();
  GuidedLoss(m, std::span<const TokenizedExample>(batch), true);
  double dec0 = 0.0;
  for (const auto& p : m.parameters()) {
    for (double g : p.grad.data()) {
      if (p.name.starts_with("dec.1.") || p.name == "gate.W") {
        ASSERT_EQ(g, 0.0) << p.name;
      }
      if (p.name.starts_with("dec.0.")) dec0 += std::abs(g);
    }
  }
  EXPECT_GT(dec0, 0.0);
}

class LossGradient : public ::testing::TestWithParam<TrainMode> {};

TEST_P(LossGradient, MatchesFiniteDifferences) {
  Model<double> m = Model<float>::Init(Tiny(12), 9).Cast<double>();
  auto batch = ToyBatch();
  batch[0].token_gates = {0.25, 0.75, 0.5};
  batch[1].token_gates = {1.0, 0.0, 0.5, 0.5};
  const std::span<const TokenizedExample> view(batch);
  auto loss = [&](bool grads) {
    return GetParam() == TrainMode::kGuided ? GuidedLoss(m, view, grads)
                                            : UnguidedLoss(m, view, grads);
  };
  loss(true);
  const auto report = testing::CompareWithFiniteDifferences(
      m.parameters(), [&] { return loss(false); }, 3, 17);
  EXPECT_LT(report.max_rel_error, 1e-4) << report.worst;
}

INSTANTIATE_TEST_SUITE_P(Modes, LossGradient,
                         ::testing::Values(TrainMode::kUnguided, TrainMode::kGuided));

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  Model<float> m = Model<float>::Init(Tiny(12), 1);
  std::map<std::string, Tensor<float>> before;
  for (const auto& p : m.parameters()) before[p.name] = p.value;
  TrainConfig config;
  config.learning_rate = 0.0;
  config.epochs = 1;
  config.batch_size = 1;
  const auto batch = ToyBatch();
  Train(m, batch, config);
  for (const auto& p : m.parameters()) EXPECT_EQ(p.value, before.at(p.name)) << p.name;
}

TEST(Train, SameSeedGivesIdenticalLogs) {
  const auto batch = ToyBatch();
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 1;
  config.seed = 4;
  auto run = [&] {
    Model<float> m = Model<float>::Init(Tiny(12), 1);
    std::vector<double> losses;
    for (const auto& log : Train(m, batch, config)) losses.push_back(log.loss_per_example);
    return losses;
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  EXPECT_EQ(a.size(), 3u);
}

TEST(Train, LearningRateDecaysLinearly) {
  const auto batch = ToyBatch();
  TrainConfig config;
  config.epochs = 4;
  config.batch_size = 2;
  Model<float> m = Model<float>::Init(Tiny(12), 1);
  const auto logs = Train(m, batch, config);
  for (std::size_t i = 1; i < logs.size(); ++i) {
    EXPECT_LT(logs[i].learning_rate, logs[i - 1].learning_rate);
  }
  EXPECT_LE(logs.front().learning_rate, config.learning_rate);
}

TEST(Train, DivergenceIsReported) {
  Model<float> m = Model<float>::Init(Tiny(12), 1);
  m.parameter("dec.0.out.b").value[3] = std::nanf("");
  TrainConfig config;
  config.epochs = 1;
  const auto batch = ToyBatch();
  EXPECT_EQ(CodeOf([&] { Train(m, batch, config); }), ErrorCode::kDivergence);
}

TEST(Train, ConfigValidation) {
  TrainConfig config;
  config.batch_size = 0;
  EXPECT_EQ(CodeOf([&] { config.Validate(); }), ErrorCode::kConfig);
  EXPECT_DOUBLE_EQ(TrainConfig::Paper().learning_rate, 1e-5);
  EXPECT_DOUBLE_EQ(TrainConfig::Paper(Feature::kSpecificity).learning_rate, 2e-5);
  EXPECT_EQ(TrainConfig::Paper().batch_size, 64u);
}

TEST(Train, MemorizesSmallCorpus) {
  SynthConfig synth;
  synth.n_examples = 50;
  synth.seed = 3;
  const Corpus corpus = GenerateSynthetic(synth);
  std::vector<std::string> texts;
  for (const auto& e : corpus.examples) {
    texts.push_back(e.article);
    texts.push_back(e.summary);
  }
  const Vocabulary vocab = Vocabulary::Build(texts, 1);
  const auto data = Tokenize(corpus, vocab);
  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.d_model = 64;
  mc.n_heads = 4;
  mc.encoder_layers = 2;
  mc.decoder_layers = 4;
  mc.shared_layers = 2;
  mc.ff_width = 128;
  mc.max_positions = 128;
  Model<float> m = Model<float>::Init(mc, 1);
  TrainConfig config;
  config.epochs = 200;
  config.learning_rate = 1e-3;
  config.batch_size = 8;
  const auto logs = Train(m, data, config);
  EXPECT_LT(logs.back().loss_per_token, 0.1);
}

}  // namespace
}  // namespace hydra
