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

#include "hydra/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "hydra/checkpoint.h"
#include "hydra/corpus.h"
#include "hydra/error.h"
#include "hydra/metrics.h"
#include "hydra/tokenizer.h"

namespace hydra::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr const char* kManifestFormat = "hydra-manifest-1";
constexpr const char* kCorpusFormat = "hydra-jsonl-1";
constexpr const char* kGenerationFormat = "hydra-generation-1";

}  // namespace

RunConfig PresetConfig(std::string_view preset, Feature feature) {
  RunConfig c;
  c.preset = std::string(preset);
  if (preset == "desk") {
    c.train = TrainConfig::Desk();
    c.decoding = DecodingConfig::Desk();
    return c;
  }
  Require(preset == "paper", ErrorCode::kConfig,
          "unknown preset '" + std::string(preset) + "' (expected desk or paper)");
  c.model.d_model = 1024;
  c.model.n_heads = 16;
  c.model.encoder_layers = 12;
  c.model.decoder_layers = 12;
  c.model.shared_layers = 8;
  c.model.num_decoders = 2;
  c.model.ff_width = 4096;
  c.model.max_positions = 1024;
  c.train = TrainConfig::Paper(feature);
  c.decoding = DecodingConfig::Paper();
  return c;
}

RunConfig ResolveConfig(std::string_view preset, const Overrides& f, Feature feature) {
  RunConfig c = PresetConfig(preset, feature);
  auto apply = [](auto& field, const auto& flag) {
    if (flag) field = *flag;
  };
  apply(c.model.d_model, f.d_model);
  apply(c.model.n_heads, f.n_heads);
  apply(c.model.encoder_layers, f.encoder_layers);
  apply(c.model.decoder_layers, f.decoder_layers);
  apply(c.model.shared_layers, f.shared_layers);
  apply(c.model.num_decoders, f.num_decoders);
  apply(c.model.ff_width, f.ff_width);
  apply(c.model.max_positions, f.max_positions);
  apply(c.train.learning_rate, f.learning_rate);
  apply(c.train.weight_decay, f.weight_decay);
  apply(c.train.max_grad_norm, f.max_grad_norm);
  apply(c.train.beta1, f.beta1);
  apply(c.train.beta2, f.beta2);
  apply(c.train.epsilon, f.adam_epsilon);
  apply(c.train.batch_size, f.batch_size);
  apply(c.train.epochs, f.epochs);
  apply(c.decoding.beam_width, f.num_beams);
  apply(c.decoding.no_repeat_ngram, f.no_repeat_ngram);
  apply(c.decoding.min_length, f.min_length);
  apply(c.decoding.max_length, f.max_length);
  apply(c.decoding.top_k, f.top_k);
  apply(c.decoding.length_penalty, f.length_penalty);
  apply(c.decoding.top_p, f.top_p);
  apply(c.decoding.mode, f.decode_mode);
  apply(c.decoding.filter_in_beam, f.filter_in_beam);
  apply(c.seed, f.seed);
  c.model.seed = c.seed;
  c.train.seed = c.seed;
  c.decoding.seed = c.seed;
  Require(c.model.shared_layers < c.model.decoder_layers, ErrorCode::kValidation,
          "shared-layers (" + std::to_string(c.model.shared_layers) +
              ") must be below decoder-layers (" +
              std::to_string(c.model.decoder_layers) + ")");
  Require(c.model.n_heads > 0 && c.model.d_model % c.model.n_heads == 0,
          ErrorCode::kValidation,
          "heads (" + std::to_string(c.model.n_heads) + ") must divide d-model (" +
              std::to_string(c.model.d_model) + ")");
  c.decoding.Validate();
  c.train.Validate();
  return c;
}

json ToJson(const RunConfig& c) {
  const ModelConfig& m = c.model;
  const TrainConfig& t = c.train;
  const DecodingConfig& d = c.decoding;
  return {
      {"preset", c.preset},
      {"seed", c.seed},
      {"model",
       {{"d_model", m.d_model},
        {"n_heads", m.n_heads},
        {"encoder_layers", m.encoder_layers},
        {"decoder_layers", m.decoder_layers},
        {"shared_layers", m.shared_layers},
        {"num_decoders", m.num_decoders},
        {"ff_width", m.ff_width},
        {"max_positions", m.max_positions}}},
      {"train",
       {{"learning_rate", t.learning_rate},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"epsilon", t.epsilon},
        {"weight_decay", t.weight_decay},
        {"max_grad_norm", t.max_grad_norm},
        {"lr_schedule", "linear-to-zero"},
        {"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"mode", TrainModeName(t.mode)}}},
      {"decoding",
       {{"num_beams", d.beam_width},
        {"length_penalty", d.length_penalty},
        {"no_repeat_ngram", d.no_repeat_ngram},
        {"min_length", d.min_length},
        {"max_length", d.max_length},
        {"top_k", d.top_k},
        {"top_p", d.top_p},
        {"decode_mode", d.mode == DecodeMode::kBeam ? "beam" : "sample"},
        {"filter_in_beam", d.filter_in_beam}}}};
}

namespace {

// Numbers as the help text shows them.
std::string Num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::string Defaults(double desk, double paper) {
  return " [desk " + Num(desk) + ", paper " + Num(paper) + "]";
}

template <typename V>
void Flag(CLI::App* app, const std::string& name, std::optional<V>& target,
          const std::string& description) {
  app->add_option_function<V>(
      name, [&target](const V& v) { target = v; }, description);
}

void AddModelFlags(CLI::App* app, Overrides& o) {
  const RunConfig desk = PresetConfig("desk");
  const RunConfig paper = PresetConfig("paper");
  const ModelConfig& a = desk.model;
  const ModelConfig& b = paper.model;
  Flag(app, "--d-model", o.d_model, "hidden width" + Defaults(a.d_model, b.d_model));
  Flag(app, "--heads", o.n_heads, "attention heads" + Defaults(a.n_heads, b.n_heads));
  Flag(app, "--encoder-layers", o.encoder_layers,
       "encoder depth" + Defaults(a.encoder_layers, b.encoder_layers));
  Flag(app, "--decoder-layers", o.decoder_layers,
       "decoder depth M" + Defaults(a.decoder_layers, b.decoder_layers));
  Flag(app, "--shared-layers", o.shared_layers,
       "shared bottom layers m" + Defaults(a.shared_layers, b.shared_layers));
  Flag(app, "--num-decoders", o.num_decoders,
       "decoders k" + Defaults(a.num_decoders, b.num_decoders));
  Flag(app, "--ff-width", o.ff_width, "feed-forward width" + Defaults(a.ff_width, b.ff_width));
  Flag(app, "--max-positions", o.max_positions,
       "max input/prefix length" + Defaults(a.max_positions, b.max_positions));
}

void AddTrainFlags(CLI::App* app, Overrides& o) {
  const TrainConfig a = TrainConfig::Desk();
  const TrainConfig b = TrainConfig::Paper();
  Flag(app, "--lr", o.learning_rate,
       "peak learning rate" + Defaults(a.learning_rate, b.learning_rate) +
           "; paper-preset specificity runs use 2e-05");
  Flag(app, "--batch-size", o.batch_size, "batch size" + Defaults(a.batch_size, b.batch_size));
  Flag(app, "--epochs", o.epochs, "epochs" + Defaults(a.epochs, b.epochs));
  Flag(app, "--max-grad-norm", o.max_grad_norm,
       "global gradient norm clip" + Defaults(a.max_grad_norm, b.max_grad_norm));
  Flag(app, "--weight-decay", o.weight_decay,
       "decoupled weight decay" + Defaults(a.weight_decay, b.weight_decay));
  Flag(app, "--beta1", o.beta1, "Adam beta1" + Defaults(a.beta1, b.beta1));
  Flag(app, "--beta2", o.beta2, "Adam beta2" + Defaults(a.beta2, b.beta2));
  Flag(app, "--adam-eps", o.adam_epsilon, "Adam epsilon" + Defaults(a.epsilon, b.epsilon));
}

void AddDecodeFlags(CLI::App* app, Overrides& o) {
  const DecodingConfig a = DecodingConfig::Desk();
  const DecodingConfig b = DecodingConfig::Paper();
  Flag(app, "--num-beams", o.num_beams, "beam width" + Defaults(a.beam_width, b.beam_width));
  Flag(app, "--length-penalty", o.length_penalty,
       "alpha in ((5+len)/6)^alpha" + Defaults(a.length_penalty, b.length_penalty));
  Flag(app, "--no-repeat-ngram", o.no_repeat_ngram,
       "blocked repeat n-gram size, 0 = off" +
           Defaults(a.no_repeat_ngram, b.no_repeat_ngram));
  Flag(app, "--min-length", o.min_length,
       "minimum generated tokens" + Defaults(a.min_length, b.min_length));
  Flag(app, "--max-length", o.max_length,
       "maximum generated tokens" + Defaults(a.max_length, b.max_length));
  Flag(app, "--top-k", o.top_k, "top-k filter, 0 = off" + Defaults(a.top_k, b.top_k));
  Flag(app, "--top-p", o.top_p, "top-p filter" + Defaults(a.top_p, b.top_p));
  app->add_option_function<std::string>(
         "--decode-mode",
         [&o](const std::string& v) {
           o.decode_mode = v == "sample" ? DecodeMode::kSample : DecodeMode::kBeam;
         },
         "beam or sample [default beam]")
      ->check(CLI::IsMember({"beam", "sample"}));
  app->add_flag_function(
      "--filter-in-beam", [&o](std::int64_t) { o.filter_in_beam = true; },
      "apply top-k/top-p to beam expansions");
}

void AddSeedFlag(CLI::App* app, Overrides& o) {
  Flag(app, "--seed", o.seed, "random seed; falls back to $HYDRA_SEED, then 0");
}

void AddPresetFlag(CLI::App* app, std::string& preset) {
  app->add_option("--preset", preset, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
}

void ApplySeedEnv(Overrides& o) {
  if (o.seed) return;
  const char* env = std::getenv("HYDRA_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  Require(end != nullptr && *end == '\0', ErrorCode::kValidation,
          "HYDRA_SEED='" + std::string(env) + "' is not an unsigned integer");
  o.seed = v;
}

void NeedArg(const std::string& value, const std::string& name) {
  Require(!value.empty(), ErrorCode::kMissingArgument, name);
}

void WriteManifest(const fs::path& primary_output, json manifest) {
  // Commands without randomness record a null seed.
  if (!manifest.contains("seed")) manifest["seed"] = nullptr;
  manifest["tool_version"] = kToolVersion;
  manifest["format_versions"] = {{"manifest", kManifestFormat},
                                 {"checkpoint", kCheckpointFormat},
                                 {"corpus", kCorpusFormat},
                                 {"generation", kGenerationFormat}};
  const fs::path path = primary_output.string() + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write manifest " + path.string());
  out << manifest.dump(2) << '\n';
}

std::ofstream OpenOutput(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<std::size_t> n_examples, entity_pool, common_pool, sentences;
  std::optional<double> style_ratio;
  bool orthogonal = false;
  Overrides o;
};

SynthConfig SynthFromJson(const fs::path& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  SynthConfig c;
  try {
    c.n_examples = j.value("n_examples", c.n_examples);
    c.entity_pool = j.value("entity_pool", c.entity_pool);
    c.common_pool = j.value("common_pool", c.common_pool);
    c.sentences_per_article = j.value("sentences_per_article", c.sentences_per_article);
    c.style_ratio = j.value("style_ratio", c.style_ratio);
    c.orthogonal = j.value("orthogonal", c.orthogonal);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return c;
}

void RunSynth(SynthArgs& a, std::ostream& out) {
  NeedArg(a.out, "out");
  SynthConfig c = a.config.empty() ? SynthConfig{} : SynthFromJson(a.config);
  if (a.n_examples) c.n_examples = *a.n_examples;
  if (a.entity_pool) c.entity_pool = *a.entity_pool;
  if (a.common_pool) c.common_pool = *a.common_pool;
  if (a.sentences) c.sentences_per_article = *a.sentences;
  if (a.style_ratio) c.style_ratio = *a.style_ratio;
  if (a.orthogonal) c.orthogonal = true;
  ApplySeedEnv(a.o);
  if (a.o.seed) c.seed = *a.o.seed;
  c.Validate();
  const Corpus corpus = GenerateSynthetic(c);
  OpenOutput(a.out).close();
  SaveCorpus(corpus, a.out);
  WriteManifest(a.out, {{"command", "synth"},
                        {"config",
                         {{"n_examples", c.n_examples},
                          {"entity_pool", c.entity_pool},
                          {"common_pool", c.common_pool},
                          {"sentences_per_article", c.sentences_per_article},
                          {"style_ratio", c.style_ratio},
                          {"orthogonal", c.orthogonal}}},
                        {"seed", c.seed},
                        {"inputs", {{"config", a.config}}},
                        {"outputs", {a.out}}});
  out << "wrote " << corpus.size() << " examples to " << a.out << "\n";
}

// ----------------------------------------------------------- build-vocab

struct VocabArgs {
  std::vector<std::string> corpora;
  std::size_t min_freq = 1;
  std::size_t max_size = 0;
  std::string out;
};

void RunBuildVocab(VocabArgs& a, std::ostream& out) {
  Require(!a.corpora.empty(), ErrorCode::kMissingArgument, "corpus");
  NeedArg(a.out, "out");
  std::vector<std::string> texts;
  for (const std::string& path : a.corpora) {
    for (const Example& ex : LoadCorpus(path).examples) {
      texts.push_back(ex.article);
      texts.push_back(ex.summary);
    }
  }
  const Vocabulary vocab = Vocabulary::Build(texts, a.min_freq, a.max_size);
  OpenOutput(a.out).close();
  vocab.Save(a.out);
  WriteManifest(a.out, {{"command", "build-vocab"},
                        {"config", {{"min_freq", a.min_freq}, {"max_size", a.max_size}}},
                        {"inputs", {{"corpus", a.corpora}}},
                        {"outputs", {a.out}},
                        {"results",
                         {{"size", vocab.size()}, {"fingerprint", vocab.Fingerprint()}}}});
  out << "vocabulary of " << vocab.size() << " tokens written to " << a.out << "\n";
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  std::string corpus;
  std::string feature = "abstractiveness";
  std::size_t buckets = 5;
  std::string level;
  std::string out;
};

void RunSplit(SplitArgs& a, std::ostream& out) {
  NeedArg(a.corpus, "corpus");
  NeedArg(a.out, "out");
  SplitConfig c;
  c.feature = ParseFeature(a.feature);
  c.buckets = a.buckets;
  if (a.level.empty()) {
    c.level = c.feature == Feature::kSpecificity ? GateLevel::kSentence : GateLevel::kSummary;
  } else {
    c.level = ParseGateLevel(a.level);
  }
  const Corpus split = PercentileSplit(LoadCorpus(a.corpus), c);
  OpenOutput(a.out).close();
  SaveCorpus(split, a.out);
  WriteManifest(a.out, {{"command", "split"},
                        {"config",
                         {{"feature", FeatureName(c.feature)},
                          {"buckets", c.buckets},
                          {"level", GateLevelName(c.level)}}},
                        {"inputs", {{"corpus", a.corpus}}},
                        {"outputs", {a.out}}});
  out << "assigned " << FeatureName(c.feature) << " gates to " << split.size()
      << " examples\n";
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus, vocab, out_ckpt;
  std::string mode = "unguided";
  std::string preset = "desk";
  std::string feature = "abstractiveness";
  Overrides o;
};

void RunTrain(TrainArgs& a, std::ostream& out) {
  NeedArg(a.corpus, "corpus");
  NeedArg(a.vocab, "vocab");
  NeedArg(a.out_ckpt, "out-ckpt");
  ApplySeedEnv(a.o);
  RunConfig c = ResolveConfig(a.preset, a.o, ParseFeature(a.feature));
  c.train.mode = ParseTrainMode(a.mode);
  const Corpus corpus = LoadCorpus(a.corpus);
  const Vocabulary vocab = Vocabulary::Load(a.vocab);
  const std::vector<TokenizedExample> examples = Tokenize(corpus, vocab);
  c.model.vocab_size = vocab.size();
  Model<float> model = Model<float>::Init(c.model, c.seed);
  json log = json::array();
  Train(model, examples, c.train, [&](const EpochLog& e) {
    out << "epoch " << e.epoch << " loss/example " << e.loss_per_example
        << " loss/token " << e.loss_per_token << "\n";
    log.push_back({{"epoch", e.epoch},
                   {"loss_per_example", e.loss_per_example},
                   {"loss_per_token", e.loss_per_token},
                   {"learning_rate", e.learning_rate}});
  });
  OpenOutput(a.out_ckpt).close();
  SaveCheckpoint(model, a.out_ckpt, &vocab);
  WriteManifest(a.out_ckpt, {{"command", "train"},
                             {"config", ToJson(c)},
                             {"seed", c.seed},
                             {"inputs", {{"corpus", a.corpus}, {"vocab", a.vocab}}},
                             {"outputs", {a.out_ckpt}},
                             {"results", {{"epochs", log}}}});
}

// ------------------------------------------------------------- generate

struct GenerateArgs {
  std::string ckpt, ckpt_b, input, vocab, out;
  std::string gate = "learned";
  std::string preset = "desk";
  Overrides o;
};

struct LoadedModel {
  LoadedCheckpoint ckpt;
  Vocabulary vocab;
};

LoadedModel LoadModel(const std::string& path, const std::string& vocab_path) {
  LoadedCheckpoint ckpt = LoadCheckpoint(path);
  Vocabulary vocab;
  if (!vocab_path.empty()) {
    vocab = Vocabulary::Load(vocab_path);
    if (ckpt.vocabulary) {
      Require(*ckpt.vocabulary == vocab, ErrorCode::kInvalidArgument,
              "vocabulary " + vocab_path + " differs from the one in " + path);
    }
  } else {
    Require(ckpt.vocabulary.has_value(), ErrorCode::kMissingArgument, "vocab");
    vocab = *ckpt.vocabulary;
  }
  Require(ckpt.model.config().vocab_size == vocab.size(), ErrorCode::kInvalidArgument,
          "checkpoint " + path + " does not match its vocabulary");
  return {std::move(ckpt), std::move(vocab)};
}

json Flags(const GenerationResult& r) {
  json flags = json::array();
  if (r.learned_gate_on_guided) flags.push_back("learned-gate-on-guided-model");
  if (r.constraint_fallback) flags.push_back("constraint-fallback");
  if (r.input_truncated) flags.push_back("input-truncated");
  return flags;
}

void RunGenerate(GenerateArgs& a, std::ostream& out) {
  NeedArg(a.ckpt, "ckpt");
  NeedArg(a.input, "input");
  NeedArg(a.out, "out");
  ApplySeedEnv(a.o);
  const RunConfig c = ResolveConfig(a.preset, a.o);
  const LoadedModel m = LoadModel(a.ckpt, a.vocab);
  const Corpus input = LoadCorpus(a.input);

  // cross:DA,DB,G mixes decoder DA of --ckpt with decoder DB of --ckpt-b.
  std::optional<LoadedModel> mb;
  std::size_t da = 0, db = 0;
  double cross_g = 0.0;
  const bool sweep = a.gate == "sweep";
  const bool cross = a.gate.starts_with("cross:");
  GateSpec spec;
  if (cross) {
    NeedArg(a.ckpt_b, "ckpt-b");
    unsigned long long x = 0, y = 0;
    double g = 0.0;
    char tail = 0;
    Require(std::sscanf(a.gate.c_str() + 6, "%llu,%llu,%lf%c", &x, &y, &g, &tail) == 3,
            ErrorCode::kParse, "bad gate spec '" + a.gate + "' (expected cross:DA,DB,G)");
    da = x;
    db = y;
    cross_g = g;
    mb = LoadModel(a.ckpt_b, a.vocab);
  } else if (!sweep) {
    spec = GateSpec::Parse(a.gate);
    spec.Validate(m.ckpt.model.num_decoders());
  } else {
    Require(m.ckpt.model.num_decoders() == 2, ErrorCode::kUnsupportedConfiguration,
            "gate sweep needs a 2-decoder model");
  }

  std::ofstream file = OpenOutput(a.out);
  std::set<std::string> flags_seen;
  auto emit = [&](const std::string& id, const std::string& gate,
                  const GenerationResult& r) {
    json rec = {{"id", id},
                {"gate", gate},
                {"summary", m.vocab.Decode(r.best().tokens)},
                {"score", r.best().score}};
    json flags = Flags(r);
    if (!flags.empty()) {
      for (const auto& f : flags) flags_seen.insert(f.get<std::string>());
      rec["flags"] = flags;
    }
    file << rec.dump() << '\n';
  };
  for (const Example& ex : input.examples) {
    const std::vector<int> ids = m.vocab.Encode(ex.article);
    if (sweep) {
      const auto results = GenerateDiverse(m.ckpt.model, ids, c.decoding);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const double g = kDefaultSweep[i];
        emit(ex.id, GateSpec::Manual({1.0 - g, g}).ToString(), results[i]);
      }
    } else if (cross) {
      const GenerationResult r = CrossModelGenerate(
          {m.ckpt.model, m.vocab, da}, {mb->ckpt.model, mb->vocab, db}, cross_g,
          ex.article, c.decoding);
      emit(ex.id, a.gate, r);
    } else {
      emit(ex.id, spec.ToString(), Generate(m.ckpt.model, ids, spec, c.decoding));
    }
  }
  file.close();
  json inputs = {{"ckpt", a.ckpt}, {"input", a.input}, {"vocab", a.vocab}};
  if (cross) inputs["ckpt_b"] = a.ckpt_b;
  WriteManifest(a.out, {{"command", "generate"},
                        {"config", {{"gate", a.gate}, {"run", ToJson(c)}}},
                        {"seed", c.seed},
                        {"inputs", inputs},
                        {"outputs", {a.out}},
                        {"results", {{"flags", flags_seen}}}});
  out << "generated summaries for " << input.size() << " articles into " << a.out << "\n";
}

// ------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string generated, references, articles, out_report;
  std::string metrics = "all";
  std::string compare;
  std::size_t iterations = 1000;
  Overrides o;
};

const std::vector<std::string>& StyleMetricNames() {
  static const std::vector<std::string> names = {
      "coverage", "density", "overlap2", "specificity", "length", "compression",
      "readability"};
  return names;
}

double StyleField(const metrics::StyleScores& s, const std::string& name) {
  if (name == "coverage") return s.coverage;
  if (name == "density") return s.density;
  if (name == "overlap2") return s.overlap2;
  if (name == "specificity") return s.specificity;
  if (name == "length") return s.abs_length;
  if (name == "compression") return s.compression;
  return s.readability;
}

struct Generated {
  std::string id;
  std::string gate;
  std::string summary;
};

std::vector<Generated> LoadGenerated(const fs::path& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path.string());
  std::vector<Generated> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.value("gate", std::string()),
                     j.at("summary").get<std::string>()});
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, path.string() + " line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
  }
  return out;
}

double MeanDefined(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

std::string Cell(double v) {
  char buf[32];
  if (std::isnan(v)) return "      n/a";
  std::snprintf(buf, sizeof(buf), "%9.4f", v);
  return buf;
}

void RunEvaluate(EvaluateArgs& a, std::ostream& out) {
  NeedArg(a.generated, "generated");
  NeedArg(a.references, "references");
  NeedArg(a.articles, "articles");
  NeedArg(a.out_report, "out-report");
  ApplySeedEnv(a.o);
  const std::uint64_t seed = a.o.seed.value_or(0);

  std::vector<std::string> style;
  bool rouge = false;
  if (a.metrics == "all") {
    style = StyleMetricNames();
    rouge = true;
  } else {
    std::stringstream ss(a.metrics);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name == "rouge") {
        rouge = true;
        continue;
      }
      Require(std::find(StyleMetricNames().begin(), StyleMetricNames().end(), name) !=
                  StyleMetricNames().end(),
              ErrorCode::kConfig, "unknown metric '" + name + "'");
      style.push_back(name);
    }
  }

  const std::vector<Generated> generated = LoadGenerated(a.generated);
  std::map<std::string, std::string> references, articles;
  for (const Example& ex : LoadCorpus(a.references).examples) references[ex.id] = ex.summary;
  for (const Example& ex : LoadCorpus(a.articles).examples) articles[ex.id] = ex.article;
  const metrics::LexicalSpecificityScorer scorer;

  struct Row {
    std::map<std::string, double> values;
    metrics::RougeTriple rouge;
  };
  std::vector<std::string> gate_order;
  std::map<std::string, std::vector<Row>> by_gate;
  std::map<std::string, std::vector<std::pair<std::string, Row>>> by_id;
  std::vector<std::string> id_order;

  std::ofstream report = OpenOutput(a.out_report);
  for (const Generated& g : generated) {
    const auto art = articles.find(g.id);
    Require(art != articles.end(), ErrorCode::kValidation,
            "no article for generated id '" + g.id + "'");
    Row row;
    json rec = {{"id", g.id}, {"gate", g.gate}};
    if (!style.empty()) {
      const metrics::StyleScores s = metrics::ComputeStyleScores(art->second, g.summary, scorer);
      for (const std::string& name : style) {
        row.values[name] = StyleField(s, name);
        rec[name] = row.values[name];
      }
    }
    if (rouge) {
      const auto ref = references.find(g.id);
      Require(ref != references.end(), ErrorCode::kValidation,
              "no reference for generated id '" + g.id + "'");
      row.rouge = metrics::Rouge(g.summary, ref->second);
      rec["rouge1"] = row.rouge.r1;
      rec["rouge2"] = row.rouge.r2;
      rec["rougeL"] = row.rouge.rl;
    }
    report << rec.dump() << '\n';
    if (!by_gate.count(g.gate)) gate_order.push_back(g.gate);
    by_gate[g.gate].push_back(row);
    if (!by_id.count(g.id)) id_order.push_back(g.id);
    by_id[g.id].push_back({g.summary, row});
  }
  report.close();

  std::ostringstream table;
  table << "gate                          n";
  for (const std::string& name : style) {
    table << " " << std::string(std::max<int>(0, 9 - static_cast<int>(name.size())), ' ')
          << name.substr(0, 9);
  }
  if (rouge) table << "       R1       R2       RL";
  table << "\n";
  json summary = json::object();
  auto line = [&](const std::string& label, std::size_t n,
                  const std::map<std::string, double>& means,
                  const std::optional<metrics::RougeTriple>& r) {
    char head[64];
    std::snprintf(head, sizeof(head), "%-24s %6zu", label.substr(0, 24).c_str(), n);
    table << head;
    for (const std::string& name : style) {
      const auto it = means.find(name);
      table << " " << Cell(it == means.end() ? std::nan("") : it->second);
    }
    if (rouge) {
      if (r) {
        table << " " << Cell(r->r1) << " " << Cell(r->r2) << " " << Cell(r->rl);
      } else {
        table << " " << Cell(std::nan("")) << " " << Cell(std::nan("")) << " "
              << Cell(std::nan(""));
      }
    }
    table << "\n";
  };
  for (const std::string& gate : gate_order) {
    const std::vector<Row>& rows = by_gate[gate];
    std::map<std::string, double> means;
    json entry = {{"n", rows.size()}};
    for (const std::string& name : style) {
      std::vector<double> v;
      for (const Row& r : rows) v.push_back(r.values.at(name));
      means[name] = MeanDefined(v);
      entry[name] = means[name];
    }
    std::optional<metrics::RougeTriple> mean_rouge;
    if (rouge) {
      metrics::RougeTriple t;
      for (const Row& r : rows) {
        t.r1 += r.rouge.r1 / rows.size();
        t.r2 += r.rouge.r2 / rows.size();
        t.rl += r.rouge.rl / rows.size();
      }
      mean_rouge = t;
      entry["rouge1"] = t.r1;
      entry["rouge2"] = t.r2;
      entry["rougeL"] = t.rl;
    }
    summary[gate.empty() ? "(none)" : gate] = entry;
    line(gate.empty() ? "(none)" : gate, rows.size(), means, mean_rouge);
  }

  // TopK rows whenever some article has several candidates.
  std::size_t max_k = 0;
  for (const auto& [id, rows] : by_id) max_k = std::max(max_k, rows.size());
  if (max_k >= 2) {
    std::map<std::string, double> sigma;
    json entry = json::object();
    for (const std::string& name : style) {
      std::vector<double> per_id;
      for (const std::string& id : id_order) {
        std::vector<double> v;
        for (const auto& [text, row] : by_id[id]) {
          if (!std::isnan(row.values.at(name))) v.push_back(row.values.at(name));
        }
        if (v.size() >= 2) per_id.push_back(metrics::StyleSigma(v));
      }
      sigma[name] = MeanDefined(per_id);
      entry["sigma_" + name] = sigma[name];
    }
    std::optional<metrics::RougeTriple> topk;
    if (rouge) {
      metrics::RougeTriple t;
      for (const std::string& id : id_order) {
        std::vector<std::string> candidates;
        for (const auto& [text, row] : by_id[id]) candidates.push_back(text);
        const metrics::RougeTriple r = metrics::TopKRouge(candidates, references.at(id));
        t.r1 += r.r1 / id_order.size();
        t.r2 += r.r2 / id_order.size();
        t.rl += r.rl / id_order.size();
      }
      topk = t;
      entry["topk_rouge1"] = t.r1;
      entry["topk_rouge2"] = t.r2;
      entry["topk_rougeL"] = t.rl;
    }
    summary["topk"] = entry;
    line("TopK (sigma / ROUGE)", id_order.size(), sigma, topk);
  }

  if (!a.compare.empty()) {
    const std::size_t comma = a.compare.find(';');
    Require(comma != std::string::npos, ErrorCode::kParse,
            "--compare expects GATE_A;GATE_B");
    const std::string ga = a.compare.substr(0, comma);
    const std::string gb = a.compare.substr(comma + 1);
    Require(by_gate.count(ga) && by_gate.count(gb), ErrorCode::kValidation,
            "--compare names gates absent from " + a.generated);
    std::map<std::string, double> va, vb;
    for (const Generated& g : generated) {
      if (g.gate != ga && g.gate != gb) continue;
      const metrics::StyleScores st =
          metrics::ComputeStyleScores(articles.at(g.id), g.summary, scorer);
      const double ov = std::isnan(st.overlap2) ? 0.0 : st.overlap2;
      (g.gate == ga ? va : vb)[g.id] = ov;
    }
    std::vector<double> xa, xb;
    for (const std::string& id : id_order) {
      if (va.count(id) && vb.count(id)) {
        xa.push_back(va[id]);
        xb.push_back(vb[id]);
      }
    }
    const double p = metrics::PairedBootstrap(xa, xb, a.iterations, seed);
    table << "paired bootstrap on overlap2, " << ga << " vs " << gb << ": p = " << p
          << " (" << xa.size() << " pairs, " << a.iterations << " resamples)\n";
    summary["bootstrap"] = {{"a", ga}, {"b", gb}, {"metric", "overlap2"},
                            {"p", p}, {"pairs", xa.size()}};
  }

  const std::string table_path = a.out_report + ".table.txt";
  std::ofstream table_file = OpenOutput(table_path);
  table_file << table.str();
  table_file.close();
  out << table.str();
  WriteManifest(a.out_report,
                {{"command", "evaluate"},
                 {"config",
                  {{"metrics", a.metrics}, {"compare", a.compare},
                   {"bootstrap_iterations", a.iterations}}},
                 {"seed", seed},
                 {"inputs",
                  {{"generated", a.generated},
                   {"references", a.references},
                   {"articles", a.articles}}},
                 {"outputs", {a.out_report, table_path}},
                 {"results", summary}});
}

const std::set<std::string>& Commands() {
  static const std::set<std::string> commands = {"synth", "build-vocab", "split",
                                                 "train", "generate", "evaluate"};
  return commands;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-decoder summarization toolkit", "hydra"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "generate a synthetic two-style corpus");
  s->add_option("--config", synth.config, "JSON file with SynthConfig fields");
  s->add_option("--out", synth.out, "output corpus (JSONL)");
  Flag(s, "--n-examples", synth.n_examples, "number of examples [default 2000]");
  Flag(s, "--entity-pool", synth.entity_pool, "entity names [default 60]");
  Flag(s, "--common-pool", synth.common_pool, "words per template slot, max 12 [default 12]");
  Flag(s, "--sentences", synth.sentences, "sentences per article [default 3]");
  Flag(s, "--style-ratio", synth.style_ratio,
       "probability of the extractive/specific style [default 0.5]");
  s->add_flag("--orthogonal", synth.orthogonal,
              "draw copy/paraphrase and specific/generic independently");
  AddSeedFlag(s, synth.o);

  VocabArgs vocab;
  CLI::App* v = app.add_subcommand("build-vocab", "build a word vocabulary");
  v->add_option("--corpus", vocab.corpora, "corpus JSONL (repeatable)");
  v->add_option("--min-freq", vocab.min_freq, "minimum count")->capture_default_str();
  v->add_option("--max-size", vocab.max_size, "cap on non-reserved tokens, 0 = none")
      ->capture_default_str();
  v->add_option("--out", vocab.out, "vocabulary file");

  SplitArgs split;
  CLI::App* p = app.add_subcommand("split", "assign percentile oracle gates");
  p->add_option("--corpus", split.corpus, "training corpus JSONL");
  p->add_option("--feature", split.feature, "abstractiveness or specificity")
      ->check(CLI::IsMember({"abstractiveness", "specificity"}))
      ->capture_default_str();
  p->add_option("--buckets", split.buckets, "percentile buckets n")->capture_default_str();
  p->add_option("--level", split.level,
                "summary or sentence [default: summary for abstractiveness, "
                "sentence for specificity]")
      ->check(CLI::IsMember({"summary", "sentence"}));
  p->add_option("--out", split.out, "output corpus with gates");

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "train a model");
  t->add_option("--corpus", train.corpus, "training corpus JSONL");
  t->add_option("--vocab", train.vocab, "vocabulary file");
  t->add_option("--mode", train.mode, "unguided or guided")
      ->check(CLI::IsMember({"unguided", "guided"}))
      ->capture_default_str();
  t->add_option("--feature", train.feature,
                "feature of the oracle gates; selects the paper-preset learning rate")
      ->check(CLI::IsMember({"abstractiveness", "specificity"}))
      ->capture_default_str();
  t->add_option("--out-ckpt", train.out_ckpt, "checkpoint path");
  AddPresetFlag(t, train.preset);
  AddModelFlags(t, train.o);
  AddTrainFlags(t, train.o);
  AddSeedFlag(t, train.o);

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "generate summaries");
  g->add_option("--ckpt", gen.ckpt, "checkpoint");
  g->add_option("--ckpt-b", gen.ckpt_b, "second checkpoint for cross:DA,DB,G");
  g->add_option("--input", gen.input, "corpus JSONL whose articles are summarized");
  g->add_option("--vocab", gen.vocab, "vocabulary [default: the checkpoint's]");
  g->add_option("--gate", gen.gate,
                "single:J | learned | manual:G0,G1 | sweep | cross:DA,DB,G")
      ->capture_default_str();
  g->add_option("--out", gen.out, "output JSONL");
  AddPresetFlag(g, gen.preset);
  AddDecodeFlags(g, gen.o);
  AddSeedFlag(g, gen.o);

  EvaluateArgs eval;
  CLI::App* e = app.add_subcommand("evaluate", "score generated summaries");
  e->add_option("--generated", eval.generated, "generation JSONL");
  e->add_option("--references", eval.references, "corpus JSONL with reference summaries");
  e->add_option("--articles", eval.articles, "corpus JSONL with articles");
  e->add_option("--metrics", eval.metrics,
                "all, or a comma list of coverage, density, overlap2, specificity, "
                "length, compression, readability, rouge")
      ->capture_default_str();
  e->add_option("--out-report", eval.out_report, "per-summary JSONL report");
  e->add_option("--compare", eval.compare,
                "GATE_A;GATE_B: paired bootstrap on overlap2 between two gates");
  e->add_option("--bootstrap-iterations", eval.iterations, "bootstrap resamples")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1000}, std::numeric_limits<std::size_t>::max()));
  AddSeedFlag(e, eval.o);

  if (args.empty() || (!args[0].starts_with("-") && !Commands().count(args[0]))) {
    err << "usage: unknown command '" << (args.empty() ? "" : args[0])
        << "' (expected synth, build-vocab, split, train, generate or evaluate)\n";
    return 2;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    std::string text = target->help();
    if (target != &app) {
      const std::string usage = "Usage: " + target->get_name();
      if (const auto at = text.find(usage); at != std::string::npos) {
        text.replace(at, usage.size(), "Usage: hydra " + target->get_name());
      }
    }
    out << text;
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ConversionError& ex) {
    err << "validation: " << ex.what() << "\n";
    return 1;
  } catch (const CLI::ValidationError& ex) {
    err << "validation: " << ex.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& ex) {
    err << "usage: " << ex.what() << "\n";
    return 2;
  }

  try {
    if (s->parsed()) RunSynth(synth, out);
    if (v->parsed()) RunBuildVocab(vocab, out);
    if (p->parsed()) RunSplit(split, out);
    if (t->parsed()) RunTrain(train, out);
    if (g->parsed()) RunGenerate(gen, out);
    if (e->parsed()) RunEvaluate(eval, out);
  } catch (const Error& ex) {
    err << ErrorCodeName(ex.code()) << ": " << ex.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& ex) {
    err << "io: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hydra::cli
