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

#include "hydra/corpus.h"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <string_view>

#include "json.hpp"

#include "hydra/error.h"
#include "hydra/tokenizer.h"

namespace hydra {

using nlohmann::json;

void Corpus::Validate() const {
  std::set<std::string> seen;
  for (const Example& ex : examples) {
    Require(seen.insert(ex.id).second, ErrorCode::kValidation,
            "duplicate example id '" + ex.id + "'");
    Require(!ex.article.empty() && !ex.summary.empty(), ErrorCode::kValidation,
            "example '" + ex.id + "' has an empty article or summary");
    auto in_range = [](double g) { return g >= 0.0 && g <= 1.0; };
    Require(!ex.gate || in_range(*ex.gate), ErrorCode::kValidation,
            "example '" + ex.id + "' has a gate outside [0, 1]");
    for (double g : ex.sentence_gates) {
      Require(in_range(g), ErrorCode::kValidation,
              "example '" + ex.id + "' has a sentence gate outside [0, 1]");
    }
  }
}

namespace {

Example ParseExample(const std::string& line, std::size_t line_no) {
  auto fail = [&](const std::string& what) {
    Fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + what);
  };
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON (") + e.what() + ")");
  }
  if (!record.is_object()) fail("expected a JSON object");
  Example ex;
  for (const char* field : {"id", "article", "summary"}) {
    if (!record.contains(field)) fail(std::string("missing \"") + field + "\"");
  }
  const json& id = record["id"];
  if (id.is_string()) {
    ex.id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    ex.id = std::to_string(id.get<long long>());
  } else {
    fail("\"id\" must be a string or integer");
  }
  if (!record["article"].is_string()) fail("\"article\" must be a string");
  if (!record["summary"].is_string()) fail("\"summary\" must be a string");
  ex.article = record["article"].get<std::string>();
  ex.summary = record["summary"].get<std::string>();
  if (record.contains("gate") && !record["gate"].is_null()) {
    if (!record["gate"].is_number()) fail("\"gate\" must be a number");
    ex.gate = record["gate"].get<double>();
  }
  if (record.contains("sentence_gates") && !record["sentence_gates"].is_null()) {
    const json& gates = record["sentence_gates"];
    if (!gates.is_array()) fail("\"sentence_gates\" must be an array");
    for (const json& g : gates) {
      if (!g.is_number()) fail("\"sentence_gates\" entries must be numbers");
      ex.sentence_gates.push_back(g.get<double>());
    }
  }
  return ex;
}

}  // namespace

Corpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open corpus " + path.string());
  Corpus corpus;
  corpus.provenance = path.string();
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Example ex = ParseExample(line, line_no);
    Require(seen.insert(ex.id).second, ErrorCode::kValidation,
            "line " + std::to_string(line_no) + ": duplicate id '" + ex.id + "'");
    corpus.examples.push_back(std::move(ex));
  }
  corpus.Validate();
  return corpus;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write corpus " + path.string());
  for (const Example& ex : corpus.examples) {
    json record = {{"id", ex.id}, {"article", ex.article}, {"summary", ex.summary}};
    if (ex.gate) record["gate"] = *ex.gate;
    if (!ex.sentence_gates.empty()) record["sentence_gates"] = ex.sentence_gates;
    out << record.dump() << '\n';
  }
  Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

void SynthConfig::Validate() const {
  Require(style_ratio >= 0.0 && style_ratio <= 1.0, ErrorCode::kConfig,
          "style ratio must lie in [0, 1]");
  Require(entity_pool >= 2, ErrorCode::kConfig, "entity pool must be >= 2");
  Require(common_pool >= 1, ErrorCode::kConfig, "common pool must be >= 1");
  Require(sentences_per_article >= 2, ErrorCode::kConfig,
          "articles need at least two sentences");
}

namespace {

// Article register.
constexpr std::array<std::string_view, 12> kVerbs = {
    "reported", "recorded", "counted", "listed", "confirmed", "tracked",
    "logged", "noted", "registered", "estimated", "announced", "found"};
constexpr std::array<std::string_view, 12> kNouns = {
    "cases", "homes", "jobs", "visits", "claims", "permits",
    "arrests", "repairs", "orders", "flights", "loans", "sales"};
constexpr std::array<std::string_view, 12> kMonths = {
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december"};
constexpr std::array<std::string_view, 12> kSubjects = {
    "officials", "residents", "workers", "leaders", "experts", "analysts",
    "volunteers", "teachers", "doctors", "engineers", "farmers", "drivers"};
constexpr std::array<std::string_view, 12> kGenericVerbs = {
    "discussed", "reviewed", "questioned", "welcomed", "criticized", "supported",
    "debated", "examined", "praised", "opposed", "studied", "described"};
constexpr std::array<std::string_view, 12> kObjects = {
    "plan", "budget", "proposal", "policy", "program", "project",
    "schedule", "report", "decision", "measure", "strategy", "review"};
constexpr std::array<std::string_view, 12> kAdverbs = {
    "again", "yesterday", "publicly", "carefully", "quietly", "openly",
    "briefly", "formally", "jointly", "calmly", "firmly", "today"};

// Paraphrase register; disjoint from the article register.
constexpr std::array<std::string_view, 8> kParaAdverbs = {
    "overall", "generally", "apparently", "reportedly",
    "broadly", "largely", "mostly", "frankly"};
constexpr std::array<std::string_view, 8> kParaSubjects = {
    "people", "locals", "folks", "communities",
    "families", "groups", "crowds", "neighbors"};
constexpr std::array<std::string_view, 8> kParaVerbs = {
    "seem", "appear", "feel", "remain", "look", "stay", "grow", "become"};
constexpr std::array<std::string_view, 8> kParaAdjectives = {
    "hopeful", "worried", "uneasy", "calm", "busy", "cautious", "upbeat", "tense"};
// Topic word paraphrasing each article noun.
constexpr std::array<std::string_view, 12> kTopics = {
    "health", "housing", "employment", "tourism", "insurance", "building",
    "crime", "maintenance", "commerce", "travel", "lending", "retail"};

std::vector<std::string> EntityNames(std::size_t count) {
  static constexpr std::array<char, 12> kOnsets = {'b', 'd', 'k', 'l', 'm', 'n',
                                                   'p', 'r', 's', 't', 'v', 'z'};
  static constexpr std::array<char, 5> kVowels = {'a', 'e', 'i', 'o', 'u'};
  static constexpr std::array<std::string_view, 4> kCodas = {"n", "r", "s", "k"};
  std::vector<std::string> names;
  // Fixed stride walk over the syllable grid; independent of any seed.
  const std::size_t grid = kOnsets.size() * kVowels.size() * kOnsets.size() *
                           kVowels.size() * kCodas.size();
  std::size_t cursor = 0;
  while (names.size() < count && names.size() < grid) {
    cursor = (cursor + 7919) % grid;
    std::size_t c = cursor;
    const char o1 = kOnsets[c % kOnsets.size()]; c /= kOnsets.size();
    const char v1 = kVowels[c % kVowels.size()]; c /= kVowels.size();
    const char o2 = kOnsets[c % kOnsets.size()]; c /= kOnsets.size();
    const char v2 = kVowels[c % kVowels.size()]; c /= kVowels.size();
    const std::string_view coda = kCodas[c % kCodas.size()];
    std::string name;
    name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(o1))));
    name.push_back(v1);
    name.push_back(o2);
    name.push_back(v2);
    name += coda;
    names.push_back(std::move(name));
  }
  return names;
}

class SentenceMaker {
 public:
  SentenceMaker(const SynthConfig& config, std::mt19937_64& rng)
      : rng_(rng),
        pool_(std::min<std::size_t>(config.common_pool, kVerbs.size())),
        entities_(EntityNames(config.entity_pool)) {}

  std::size_t Pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool Coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  std::string Entity() { return entities_[Pick(entities_.size())]; }
  std::string Number() { return std::to_string(2 + Pick(98)); }
  template <std::size_t N>
  std::string From(const std::array<std::string_view, N>& list) {
    return std::string(list[Pick(std::min(pool_, N))]);
  }
  template <std::size_t N>
  std::string FromAll(const std::array<std::string_view, N>& list) {
    return std::string(list[Pick(N)]);
  }

  // Digit- and entity-dense sentence. lead_noun receives the index of the
  // first noun for paraphrasing.
  std::vector<std::string> Specific(std::size_t* lead_noun) {
    const std::size_t noun = Pick(std::min(pool_, kNouns.size()));
    if (lead_noun) *lead_noun = noun;
    const std::string n1(kNouns[noun]);
    switch (Pick(3)) {
      case 0:
        return {Entity(), From(kVerbs), Number(), n1, ",", Number(),
                From(kNouns), "and", Number(), From(kNouns), "."};
      case 1:
        return {Entity(), From(kVerbs), Number(), n1, "in", Entity(),
                "on", Number(), From(kMonths), "."};
      default:
        return {Entity(), From(kVerbs), Number(), n1, "and", Number(),
                From(kNouns), "over", Number(), "days", "."};
    }
  }

  std::vector<std::string> Generic() {
    std::vector<std::string> words;
    if (Coin(0.5)) {
      words = {"the", From(kSubjects), From(kGenericVerbs), "the",
               From(kObjects), From(kAdverbs), "."};
    } else {
      words = {From(kSubjects), From(kGenericVerbs), "the", "new",
               From(kObjects), From(kAdverbs), "."};
    }
    words[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(words[0][0])));
    return words;
  }

  std::vector<std::string> GenericParaphrase(std::size_t noun) {
    return {FromAll(kParaAdverbs), FromAll(kParaSubjects), FromAll(kParaVerbs),
            FromAll(kParaAdjectives), "about", std::string(kTopics[noun]), "."};
  }

  // Reuses entities and numbers from the source sentence in new contexts.
  std::vector<std::string> SpecificParaphrase(const std::vector<std::string>& source,
                                              std::size_t noun) {
    std::vector<std::string> entities, numbers;
    for (const std::string& w : source) {
      if (std::isupper(static_cast<unsigned char>(w[0]))) entities.push_back(w);
      if (std::isdigit(static_cast<unsigned char>(w[0]))) numbers.push_back(w);
    }
    return {FromAll(kParaAdverbs), entities.at(0), "saw", numbers.at(0),
            std::string(kTopics[noun]), "changes", "plus", numbers.at(1),
            "more", "."};
  }

 private:
  std::mt19937_64& rng_;
  std::size_t pool_;
  std::vector<std::string> entities_;
};

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

Corpus GenerateSynthetic(const SynthConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);
  SentenceMaker make(config, rng);
  Corpus corpus;
  corpus.provenance = "synthetic:seed=" + std::to_string(config.seed) +
                      (config.orthogonal ? ":orthogonal" : ":coupled");
  for (std::size_t i = 0; i < config.n_examples; ++i) {
    std::size_t noun = 0;
    std::vector<std::vector<std::string>> sentences;
    sentences.push_back(make.Specific(&noun));
    sentences.push_back(make.Generic());
    for (std::size_t s = 2; s < config.sentences_per_article; ++s) {
      sentences.push_back(make.Coin(0.5) ? make.Specific(nullptr) : make.Generic());
    }
    std::string article;
    for (const auto& s : sentences) {
      if (!article.empty()) article.push_back(' ');
      article += Join(s);
    }
    const bool extractive = make.Coin(config.style_ratio);
    std::vector<std::string> summary;
    if (!config.orthogonal) {
      summary = extractive ? sentences[0] : make.GenericParaphrase(noun);
    } else {
      const bool specific = make.Coin(config.style_ratio);
      if (extractive) {
        summary = specific ? sentences[0] : sentences[1];
      } else {
        summary = specific ? make.SpecificParaphrase(sentences[0], noun)
                           : make.GenericParaphrase(noun);
      }
    }
    char id[48];
    std::snprintf(id, sizeof(id), "synth-%llu-%05zu",
                  static_cast<unsigned long long>(config.seed), i);
    corpus.examples.push_back(Example{id, article, Join(summary), std::nullopt, {}});
  }
  return corpus;
}

Corpus GenerateSynthetic(SynthConfig config, std::uint64_t seed) {
  config.seed = seed;
  return GenerateSynthetic(config);
}

}  // namespace hydra
