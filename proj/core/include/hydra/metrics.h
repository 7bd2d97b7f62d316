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

#ifndef HYDRA_METRICS_H_
#define HYDRA_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hydra::metrics {

// Word tokens with punctuation-only tokens removed; case preserved.
std::vector<std::string> Words(std::string_view text);
// Words(), lowercased. Abstractiveness and ROUGE operate on these.
std::vector<std::string> NormalizedWords(std::string_view text);

// A summary span copied verbatim from the article.
struct Fragment {
  std::size_t summary_start = 0;
  std::size_t article_start = 0;
  std::size_t length = 0;
  bool operator==(const Fragment&) const = default;
};

// Greedy left-to-right fragment matching: at each summary position take the
// longest article match starting there (leftmost on ties) and jump past it;
// unmatched words advance by one.
std::vector<Fragment> ExtractiveFragments(std::span<const std::string> article,
                                          std::span<const std::string> summary);

struct CoverageDensity {
  double coverage = 0.0;
  double density = 0.0;
};

// coverage = sum |f| / |s|, density = sum |f|^2 / |s|. Throws
// Error(kUndefinedMetric) for an empty summary.
CoverageDensity ComputeCoverageDensity(std::span<const Fragment> fragments,
                                       std::size_t summary_length);

// Fraction of summary n-grams (counted with multiplicity) that occur in the
// article's n-gram set. Throws Error(kUndefinedMetric) if the summary has
// fewer than n words.
double NgramOverlap(std::span<const std::string> article,
                    std::span<const std::string> summary, std::size_t n);
double NgramOverlap(std::string_view article, std::string_view summary,
                    std::size_t n);

// Sentence-level specificity in [0, 1].
class SpecificityScorer {
 public:
  virtual ~SpecificityScorer() = default;
  // Throws Error(kUndefinedMetric) for a sentence without words.
  virtual double Score(std::string_view sentence) const = 0;
};

// Deterministic lexical proxy:
//   logistic(-1.5 + 4 digit + 3 capitalized_noninitial + 2 rare
//            + 0.05 min(words, 20))
// where the first three terms are fractions of the sentence's words. A word
// is rare when it is outside the `rare_rank` most frequent words of a
// reference corpus; without a reference corpus no word is rare.
class LexicalSpecificityScorer : public SpecificityScorer {
 public:
  struct Features {
    std::size_t words = 0;
    double digit_fraction = 0.0;
    double capitalized_fraction = 0.0;
    double rare_fraction = 0.0;
  };

  LexicalSpecificityScorer() = default;
  static LexicalSpecificityScorer FromCorpus(std::span<const std::string> texts,
                                             std::size_t rare_rank = 500);

  double Score(std::string_view sentence) const override;
  Features Extract(std::string_view sentence) const;
  static double Logit(const Features& features);
  bool has_reference() const { return has_reference_; }

 private:
  bool has_reference_ = false;
  std::unordered_map<std::string, std::size_t> frequent_;
};

double Logistic(double x);

// Unweighted mean of sentence scores over SplitSentences(summary).
double SummarySpecificity(std::string_view summary,
                          const SpecificityScorer& scorer);

// Vowel groups (a, e, i, o, u, y), minus one for a trailing 'e', at least 1.
int CountSyllables(std::string_view word);

// 206.835 - 1.015 words/sentences - 84.6 syllables/words.
double FleschReadingEase(std::string_view text);

struct RougeTriple {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
  bool operator==(const RougeTriple&) const = default;
};

// F1 of clipped unigram and bigram overlap and of the longest common
// subsequence, over lowercased words. No stemming, no stopword removal.
RougeTriple Rouge(std::string_view candidate, std::string_view reference);
// Component-wise maximum over the candidates.
RougeTriple TopKRouge(std::span<const std::string> candidates,
                      std::string_view reference);

// Population standard deviation; needs at least two values.
double StyleSigma(std::span<const double> values);

// Paired bootstrap: resample example indices with replacement and count the
// resamples whose mean difference (a - b) does not share the observed sign.
// Returns twice that fraction, capped at 1; 1 when the observed difference
// is zero.
double PairedBootstrap(std::span<const double> scores_a,
                       std::span<const double> scores_b,
                       std::size_t iterations, std::uint64_t seed);

// Per-summary style record. Metrics undefined for the input (e.g. overlap of
// a one-word summary) are NaN.
struct StyleScores {
  double coverage = 0.0;
  double density = 0.0;
  double overlap2 = 0.0;
  double specificity = 0.0;
  double abs_length = 0.0;
  double compression = 0.0;
  double readability = 0.0;
};

StyleScores ComputeStyleScores(std::string_view article,
                               std::string_view summary,
                               const SpecificityScorer& scorer);

}  // namespace hydra::metrics

#endif  // HYDRA_METRICS_H_
