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

#ifndef HYDRA_CORPUS_H_
#define HYDRA_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hydra {

// One training/evaluation unit. Gates, when present, lie in [0, 1];
// sentence_gates align 1:1 with SplitSentences(summary).
struct Example {
  std::string id;
  std::string article;
  std::string summary;
  std::optional<double> gate;
  std::vector<double> sentence_gates;

  bool operator==(const Example&) const = default;
};

struct Corpus {
  std::vector<Example> examples;
  std::string provenance;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  // Throws Error(kValidation) on duplicate ids, empty texts or gates
  // outside [0, 1].
  void Validate() const;
};

// JSONL, one object per line with "id", "article", "summary" and optionally
// "gate" or "sentence_gates". Blank lines are skipped.
Corpus LoadCorpus(const std::filesystem::path& path);
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);

// Parameters of the two-style synthetic corpus.
struct SynthConfig {
  std::size_t n_examples = 2000;
  std::size_t entity_pool = 60;
  std::size_t common_pool = 12;
  std::size_t sentences_per_article = 3;
  // Probability of the extractive/specific style.
  double style_ratio = 0.5;
  // Sample copy-vs-paraphrase and specific-vs-generic independently.
  bool orthogonal = false;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const SynthConfig&) const = default;
};

// Articles mix templated sentences built from capitalized entity names,
// digit tokens and a common news vocabulary. Each summary either copies an
// article sentence verbatim (extractive style) or paraphrases with a
// disjoint generic vocabulary (abstractive style). In orthogonal mode the
// specific/generic axis is drawn independently of copy/paraphrase.
Corpus GenerateSynthetic(const SynthConfig& config);
Corpus GenerateSynthetic(SynthConfig config, std::uint64_t seed);

}  // namespace hydra

#endif  // HYDRA_CORPUS_H_
