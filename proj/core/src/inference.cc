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

#include "hydra/inference.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hydra/error.h"

namespace hydra {

GateSpec GateSpec::Single(std::size_t j) {
  GateSpec s;
  s.kind = Kind::kSingle;
  s.decoder = j;
  return s;
}

GateSpec GateSpec::Learned() { return GateSpec{}; }

GateSpec GateSpec::Manual(std::vector<double> g) {
  GateSpec s;
  s.kind = Kind::kManual;
  s.manual.g = std::move(g);
  return s;
}

namespace {

double ParseNumber(std::string_view text, std::string_view context) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  Require(ec == std::errc() && ptr == text.data() + text.size(), ErrorCode::kParse,
          "bad number '" + std::string(text) + "' in gate spec '" +
              std::string(context) + "'");
  return value;
}

std::string FormatNumber(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

GateSpec GateSpec::Parse(std::string_view text) {
  if (text == "learned") return Learned();
  if (text.starts_with("single:")) {
    const std::string_view digits = text.substr(7);
    std::size_t j = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), j);
    Require(!digits.empty() && ec == std::errc() && ptr == digits.data() + digits.size(),
            ErrorCode::kParse, "bad decoder index in gate spec '" + std::string(text) + "'");
    return Single(j);
  }
  if (text.starts_with("manual:")) {
    std::vector<double> g;
    std::string_view rest = text.substr(7);
    while (true) {
      const std::size_t comma = rest.find(',');
      g.push_back(ParseNumber(rest.substr(0, comma), text));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return Manual(std::move(g));
  }
  Fail(ErrorCode::kParse, "unknown gate spec '" + std::string(text) +
                              "' (expected single:J, learned or manual:G0,G1)");
}

std::string GateSpec::ToString() const {
  switch (kind) {
    case Kind::kSingle:
      return "single:" + std::to_string(decoder);
    case Kind::kLearned:
      return "learned";
    case Kind::kManual: {
      std::string out = "manual:";
      for (std::size_t i = 0; i < manual.g.size(); ++i) {
        if (i) out += ",";
        out += FormatNumber(manual.g[i]);
      }
      return out;
    }
  }
  return "";
}

void GateSpec::Validate(std::size_t k) const {
  if (kind == Kind::kSingle) {
    Require(decoder < k, ErrorCode::kIndex,
            "single:" + std::to_string(decoder) + " but the model has " +
                std::to_string(k) + " decoders");
  } else if (kind == Kind::kManual) {
    Require(manual.g.size() == k, ErrorCode::kInvalidArgument,
            "manual gate has " + std::to_string(manual.g.size()) +
                " entries for " + std::to_string(k) + " decoders");
    manual.Validate();
  }
}

DecodingConfig DecodingConfig::Desk() { return DecodingConfig{}; }

DecodingConfig DecodingConfig::Paper() {
  DecodingConfig c;
  c.beam_width = 5;
  c.length_penalty = 2.0;
  c.no_repeat_ngram = 3;
  c.min_length = 12;
  c.max_length = 200;
  c.top_k = 30;
  c.top_p = 0.5;
  return c;
}

void DecodingConfig::Validate() const {
  Require(min_length <= max_length, ErrorCode::kValidation,
          "min-length (" + std::to_string(min_length) + ") exceeds max-length (" +
              std::to_string(max_length) + ")");
  Require(beam_width >= 1, ErrorCode::kValidation, "num-beams must be >= 1");
  Require(top_p > 0.0 && top_p <= 1.0, ErrorCode::kValidation,
          "top-p must lie in (0, 1]");
  Require(max_length >= 1, ErrorCode::kValidation, "max-length must be >= 1");
  Require(std::isfinite(length_penalty), ErrorCode::kValidation,
          "length-penalty must be finite");
}

namespace {

bool Normalize(std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(sum > 0.0)) return false;
  for (double& x : p) x /= sum;
  return true;
}

}  // namespace

Filtered ApplyConstraints(std::span<const double> distribution,
                          std::span<const int> prefix,
                          const DecodingConfig& config) {
  Filtered out;
  out.probs.assign(distribution.begin(), distribution.end());
  std::vector<double>& p = out.probs;
  auto block = [&](int id) {
    if (id >= 0 && static_cast<std::size_t>(id) < p.size()) p[id] = 0.0;
  };
  block(kPadId);
  block(kBosId);
  const std::span<const int> generated =
      !prefix.empty() && prefix.front() == kBosId ? prefix.subspan(1) : prefix;
  if (generated.size() < config.min_length) block(kEosId);
  const std::size_t n = config.no_repeat_ngram;
  if (n > 0 && generated.size() + 1 >= n) {
    const std::span<const int> tail = generated.last(n - 1);
    for (std::size_t i = 0; i + n - 1 < generated.size(); ++i) {
      if (std::equal(tail.begin(), tail.end(), generated.begin() + i)) {
        block(generated[i + n - 1]);
      }
    }
  }
  if (!Normalize(p)) {
    p.assign(distribution.begin(), distribution.end());
    Normalize(p);
    out.fallback = true;
  }
  return out;
}

std::vector<double> NucleusFilter(std::span<const double> distribution,
                                  std::size_t top_k, double top_p) {
  std::vector<int> order(distribution.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return distribution[a] > distribution[b];
  });
  std::size_t keep = order.size();
  if (top_k > 0) keep = std::min(keep, top_k);
  double kept_mass = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept_mass += distribution[order[i]];
  if (kept_mass > 0.0) {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < keep; ++i) {
      cumulative += distribution[order[i]] / kept_mass;
      if (cumulative >= top_p - 1e-12) {
        keep = i + 1;
        break;
      }
    }
  }
  std::vector<double> out(distribution.size(), 0.0);
  for (std::size_t i = 0; i < keep; ++i) out[order[i]] = distribution[order[i]];
  if (!Normalize(out)) {
    out.assign(distribution.begin(), distribution.end());
    Normalize(out);
  }
  return out;
}

int NucleusSample(std::span<const double> distribution, std::size_t top_k,
                  double top_p, std::mt19937_64& rng) {
  const std::vector<double> p = NucleusFilter(distribution, top_k, top_p);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last = static_cast<int>(i);
    cumulative += p[i];
    if (u < cumulative) return last;
  }
  return last;
}

double LengthPenalty(std::size_t length, double alpha) {
  return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

std::vector<Hypothesis> BeamSearch(const NextFn& next, const DecodingConfig& config,
                                   int bos, int eos) {
  config.Validate();
  const std::size_t width = config.beam_width;
  struct Candidate {
    std::size_t beam;
    int token;
    double logprob;
  };
  std::vector<Hypothesis> live(1), finished;
  std::vector<int> prefix;
  for (std::size_t step = 0; step < config.max_length && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < live.size(); ++b) {
      prefix.assign(1, bos);
      prefix.insert(prefix.end(), live[b].tokens.begin(), live[b].tokens.end());
      std::vector<double> dist = next(prefix);
      if (config.filter_in_beam) dist = NucleusFilter(dist, config.top_k, config.top_p);
      for (std::size_t t = 0; t < dist.size(); ++t) {
        if (dist[t] > 0.0) {
          candidates.push_back({b, static_cast<int>(t), live[b].logprob + std::log(dist[t])});
        }
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.logprob > b.logprob;
                     });
    std::vector<Hypothesis> next_live;
    for (std::size_t rank = 0; rank < candidates.size() && next_live.size() < width;
         ++rank) {
      const Candidate& c = candidates[rank];
      Hypothesis h;
      h.tokens = live[c.beam].tokens;
      h.tokens.push_back(c.token);
      h.logprob = c.logprob;
      h.score = h.logprob / LengthPenalty(h.tokens.size(), config.length_penalty);
      if (c.token == eos) {
        // Only finishes ranked inside the beam are kept.
        if (rank < width) {
          h.finished = true;
          finished.push_back(std::move(h));
        }
      } else {
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
    if (finished.size() >= width) break;
  }
  if (finished.size() < width) {
    for (Hypothesis& h : live) finished.push_back(std::move(h));
  }
  std::stable_sort(finished.begin(), finished.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.score > b.score;
                   });
  return finished;
}

Hypothesis SampleSequence(const NextFn& next, const DecodingConfig& config,
                          std::mt19937_64& rng, int bos, int eos) {
  config.Validate();
  Hypothesis h;
  std::vector<int> prefix = {bos};
  for (std::size_t step = 0; step < config.max_length; ++step) {
    const std::vector<double> dist =
        NucleusFilter(next(prefix), config.top_k, config.top_p);
    const int token = NucleusSample(dist, 0, 1.0, rng);
    h.tokens.push_back(token);
    prefix.push_back(token);
    h.logprob += std::log(dist[token]);
    if (token == eos) {
      h.finished = true;
      break;
    }
  }
  h.score = h.logprob / LengthPenalty(h.tokens.size(), config.length_penalty);
  return h;
}

DecodingSession::DecodingSession(const Model<float>& model,
                                 std::span<const int> article_ids)
    : model_(&model),
      encoder_(EncodeDocument(model, article_ids)),
      cache_(model.BuildCrossCache(encoder_.states)) {}

DecodingSession::Step DecodingSession::Forward(std::span<const int> prefix) const {
  Tape<float> tape(false);
  const DecoderPass pass = model_->DecodeCached(tape, cache_, prefix, prefix.size() - 1);
  Step step;
  const std::span<const float> hidden = tape.data(pass.shared_hidden);
  const std::size_t d = model_->config().d_model;
  step.shared_hidden.assign(hidden.end() - static_cast<std::ptrdiff_t>(d), hidden.end());
  for (Var logits : pass.logits) {
    const std::span<const float> row = tape.data(logits);
    const std::vector<double> wide(row.begin(), row.end());
    step.probs.push_back(numerics::Softmax<double>(wide));
  }
  return step;
}

std::vector<double> DecodingSession::Next(std::span<const int> prefix,
                                          const GateSpec& gate) const {
  const std::size_t k = model_->num_decoders();
  gate.Validate(k);
  Step step = Forward(prefix);
  switch (gate.kind) {
    case GateSpec::Kind::kSingle:
      return MixtureDistribution(step.probs, GateVector::OneHot(k, gate.decoder));
    case GateSpec::Kind::kManual:
      return MixtureDistribution(step.probs, gate.manual);
    case GateSpec::Kind::kLearned:
      return MixtureDistribution(
          step.probs, GateProbs<float>(*model_, step.shared_hidden));
  }
  return {};
}

NextDistributionResult NextDistribution(const Model<float>& model,
                                        const EncoderStates<float>& encoder,
                                        std::span<const int> prefix,
                                        const GateSpec& gate) {
  Require(!prefix.empty() && prefix.front() == kBosId, ErrorCode::kInvalidArgument,
          "prefix must start with BOS");
  gate.Validate(model.num_decoders());
  const auto cache = model.BuildCrossCache(encoder.states);
  Tape<float> tape(false);
  const DecoderPass pass = model.DecodeCached(tape, cache, prefix, prefix.size() - 1);
  std::vector<std::vector<double>> probs;
  for (Var logits : pass.logits) {
    const std::span<const float> row = tape.data(logits);
    probs.push_back(numerics::Softmax<double>(std::vector<double>(row.begin(), row.end())));
  }
  const std::size_t k = model.num_decoders();
  GateVector g;
  if (gate.kind == GateSpec::Kind::kSingle) {
    g = GateVector::OneHot(k, gate.decoder);
  } else if (gate.kind == GateSpec::Kind::kManual) {
    g = gate.manual;
  } else {
    const std::span<const float> hidden = tape.data(pass.shared_hidden);
    const std::size_t d = model.config().d_model;
    g = GateProbs<float>(model, hidden.last(d));
  }
  NextDistributionResult out;
  out.probs = MixtureDistribution(probs, g);
  out.learned_gate_on_guided =
      gate.kind == GateSpec::Kind::kLearned && model.config().guided;
  return out;
}

namespace {

DecodingConfig Capped(const DecodingConfig& config, std::size_t max_positions) {
  DecodingConfig c = config;
  // The decoder input is BOS plus every generated token but the last.
  c.max_length = std::min(c.max_length, max_positions);
  c.min_length = std::min(c.min_length, c.max_length);
  return c;
}

GenerationResult Run(const std::function<std::vector<double>(std::span<const int>)>& raw,
                     const DecodingConfig& config) {
  GenerationResult result;
  const NextFn next = [&](std::span<const int> prefix) {
    Filtered f = ApplyConstraints(raw(prefix), prefix, config);
    result.constraint_fallback |= f.fallback;
    return std::move(f.probs);
  };
  if (config.mode == DecodeMode::kBeam) {
    result.hypotheses = BeamSearch(next, config);
  } else {
    std::mt19937_64 rng(config.seed);
    result.hypotheses.push_back(SampleSequence(next, config, rng));
  }
  return result;
}

}  // namespace

GenerationResult Generate(const Model<float>& model, std::span<const int> article_ids,
                          const GateSpec& gate, const DecodingConfig& config) {
  config.Validate();
  gate.Validate(model.num_decoders());
  const DecodingSession session(model, article_ids);
  const DecodingConfig c = Capped(config, model.config().max_positions);
  GenerationResult result = Run(
      [&](std::span<const int> prefix) { return session.Next(prefix, gate); }, c);
  result.learned_gate_on_guided =
      gate.kind == GateSpec::Kind::kLearned && model.config().guided;
  result.input_truncated = session.encoder().truncated;
  return result;
}

std::vector<GenerationResult> GenerateDiverse(const Model<float>& model,
                                              std::span<const int> article_ids,
                                              const DecodingConfig& config,
                                              std::span<const double> gate_values) {
  Require(model.num_decoders() == 2, ErrorCode::kUnsupportedConfiguration,
          "gate sweeps need exactly 2 decoders");
  config.Validate();
  const DecodingSession session(model, article_ids);
  const DecodingConfig c = Capped(config, model.config().max_positions);
  std::vector<GenerationResult> out;
  for (double g : gate_values) {
    Require(g >= 0.0 && g <= 1.0, ErrorCode::kInvalidArgument,
            "sweep gate " + FormatNumber(g) + " outside [0, 1]");
    const GateSpec gate = GateSpec::Manual({1.0 - g, g});
    GenerationResult r = Run(
        [&](std::span<const int> prefix) { return session.Next(prefix, gate); }, c);
    r.input_truncated = session.encoder().truncated;
    out.push_back(std::move(r));
  }
  return out;
}

GenerationResult CrossModelGenerate(const CrossMember& a, const CrossMember& b,
                                    double g, std::string_view article,
                                    const DecodingConfig& config) {
  Require(a.vocabulary.Fingerprint() == b.vocabulary.Fingerprint(),
          ErrorCode::kInvalidArgument, "cross-model mixing needs one shared vocabulary");
  for (const CrossMember* m : {&a, &b}) {
    Require(m->model.config().vocab_size == m->vocabulary.size(),
            ErrorCode::kInvalidArgument, "model does not match its vocabulary");
    GateSpec::Single(m->decoder).Validate(m->model.num_decoders());
  }
  Require(g >= 0.0 && g <= 1.0, ErrorCode::kInvalidArgument, "g must lie in [0, 1]");
  config.Validate();
  const std::vector<int> ids = a.vocabulary.Encode(article);
  const DecodingSession sa(a.model, ids);
  const DecodingSession sb(b.model, ids);
  const DecodingConfig c = Capped(
      config, std::min(a.model.config().max_positions, b.model.config().max_positions));
  GenerationResult result = Run(
      [&](std::span<const int> prefix) {
        const std::vector<double> pa = sa.Forward(prefix).probs[a.decoder];
        const std::vector<double> pb = sb.Forward(prefix).probs[b.decoder];
        return MixtureDistribution({pa, pb}, GateVector{{1.0 - g, g}});
      },
      c);
  result.input_truncated = sa.encoder().truncated || sb.encoder().truncated;
  return result;
}

}  // namespace hydra
