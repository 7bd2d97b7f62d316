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

#include "hydra/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "hydra/error.h"
#include "hydra/tokenizer.h"

namespace hydra::metrics {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool HasWordChar(const std::string& token) {
  return std::any_of(token.begin(), token.end(), [](unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
  });
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::vector<std::string> Ngrams(std::span<const std::string> tokens,
                                std::size_t n) {
  std::vector<std::string> grams;
  if (tokens.size() < n) return grams;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      gram.push_back('\x1f');
      gram += tokens[i + k];
    }
    grams.push_back(std::move(gram));
  }
  return grams;
}

double F1(double overlap, double candidate_total, double reference_total) {
  const double p = candidate_total > 0 ? overlap / candidate_total : 0.0;
  const double r = reference_total > 0 ? overlap / reference_total : 0.0;
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

double ClippedOverlap(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  std::map<std::string, int> ref_counts;
  for (const std::string& g : reference) ++ref_counts[g];
  double overlap = 0.0;
  std::map<std::string, int> cand_counts;
  for (const std::string& g : candidate) ++cand_counts[g];
  for (const auto& [gram, count] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

std::size_t LcsLength(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> words;
  for (std::string& token : SplitWords(text)) {
    if (HasWordChar(token)) words.push_back(std::move(token));
  }
  return words;
}

std::vector<std::string> NormalizedWords(std::string_view text) {
  std::vector<std::string> words = Words(text);
  for (std::string& w : words) w = Lower(std::move(w));
  return words;
}

std::vector<Fragment> ExtractiveFragments(std::span<const std::string> article,
                                          std::span<const std::string> summary) {
  std::vector<Fragment> fragments;
  std::size_t i = 0;
  while (i < summary.size()) {
    std::size_t best_len = 0, best_start = 0;
    for (std::size_t j = 0; j < article.size(); ++j) {
      std::size_t k = 0;
      while (i + k < summary.size() && j + k < article.size() &&
             summary[i + k] == article[j + k]) {
        ++k;
      }
      if (k > best_len) {
        best_len = k;
        best_start = j;
      }
    }
    if (best_len > 0) {
      fragments.push_back({i, best_start, best_len});
      i += best_len;
    } else {
      ++i;
    }
  }
  return fragments;
}

CoverageDensity ComputeCoverageDensity(std::span<const Fragment> fragments,
                                       std::size_t summary_length) {
  Require(summary_length > 0, ErrorCode::kUndefinedMetric,
          "coverage/density undefined for an empty summary");
  double covered = 0.0, squared = 0.0;
  for (const Fragment& f : fragments) {
    const double len = static_cast<double>(f.length);
    covered += len;
    squared += len * len;
  }
  const double n = static_cast<double>(summary_length);
  return {covered / n, squared / n};
}

double NgramOverlap(std::span<const std::string> article,
                    std::span<const std::string> summary, std::size_t n) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  Require(summary.size() >= n, ErrorCode::kUndefinedMetric,
          std::to_string(n) + "-gram overlap undefined for a summary of " +
              std::to_string(summary.size()) + " words");
  const std::vector<std::string> article_grams = Ngrams(article, n);
  const std::set<std::string> article_set(article_grams.begin(),
                                          article_grams.end());
  const std::vector<std::string> summary_grams = Ngrams(summary, n);
  std::size_t found = 0;
  for (const std::string& g : summary_grams) found += article_set.count(g);
  return static_cast<double>(found) / static_cast<double>(summary_grams.size());
}

double NgramOverlap(std::string_view article, std::string_view summary,
                    std::size_t n) {
  const auto a = NormalizedWords(article);
  const auto s = NormalizedWords(summary);
  return NgramOverlap(a, s, n);
}

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LexicalSpecificityScorer LexicalSpecificityScorer::FromCorpus(
    std::span<const std::string> texts, std::size_t rare_rank) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string& w : NormalizedWords(text)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  LexicalSpecificityScorer scorer;
  scorer.has_reference_ = true;
  for (std::size_t i = 0; i < ranked.size() && i < rare_rank; ++i) {
    scorer.frequent_.emplace(ranked[i].first, i);
  }
  return scorer;
}

LexicalSpecificityScorer::Features LexicalSpecificityScorer::Extract(
    std::string_view sentence) const {
  const std::vector<std::string> words = Words(sentence);
  Require(!words.empty(), ErrorCode::kUndefinedMetric,
          "specificity undefined for a sentence without words");
  std::size_t digits = 0, capitalized = 0, rare = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    if (std::any_of(w.begin(), w.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      ++digits;
    }
    if (i > 0 && std::isupper(static_cast<unsigned char>(w[0]))) ++capitalized;
    if (has_reference_ && !frequent_.contains(Lower(w))) ++rare;
  }
  const double n = static_cast<double>(words.size());
  return {words.size(), digits / n, capitalized / n, rare / n};
}

double LexicalSpecificityScorer::Logit(const Features& f) {
  return -1.5 + 4.0 * f.digit_fraction + 3.0 * f.capitalized_fraction +
         2.0 * f.rare_fraction +
         0.05 * static_cast<double>(std::min<std::size_t>(f.words, 20));
}

double LexicalSpecificityScorer::Score(std::string_view sentence) const {
  return Logistic(Logit(Extract(sentence)));
}

double SummarySpecificity(std::string_view summary,
                          const SpecificityScorer& scorer) {
  const std::vector<std::string> sentences = SplitSentences(summary);
  Require(!sentences.empty(), ErrorCode::kUndefinedMetric,
          "specificity undefined for an empty summary");
  double total = 0.0;
  for (const std::string& s : sentences) total += scorer.Score(s);
  return total / static_cast<double>(sentences.size());
}

int CountSyllables(std::string_view word) {
  auto is_vowel = [](char c) {
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
        return true;
      default:
        return false;
    }
  };
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (!word.empty() && std::tolower(static_cast<unsigned char>(word.back())) == 'e') {
    --groups;
  }
  return std::max(groups, 1);
}

double FleschReadingEase(std::string_view text) {
  const std::vector<std::string> words = Words(text);
  const std::size_t sentences = SplitSentences(text).size();
  Require(!words.empty() && sentences > 0, ErrorCode::kUndefinedMetric,
          "readability undefined for empty text");
  double syllables = 0.0;
  for (const std::string& w : words) syllables += CountSyllables(w);
  const double n = static_cast<double>(words.size());
  return 206.835 - 1.015 * (n / static_cast<double>(sentences)) -
         84.6 * (syllables / n);
}

RougeTriple Rouge(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> cand = NormalizedWords(candidate);
  const std::vector<std::string> ref = NormalizedWords(reference);
  Require(!ref.empty(), ErrorCode::kUndefinedMetric,
          "ROUGE undefined for an empty reference");
  RougeTriple out;
  out.r1 = F1(ClippedOverlap(cand, ref), static_cast<double>(cand.size()),
              static_cast<double>(ref.size()));
  const auto cand2 = Ngrams(cand, 2);
  const auto ref2 = Ngrams(ref, 2);
  out.r2 = F1(ClippedOverlap(cand2, ref2), static_cast<double>(cand2.size()),
              static_cast<double>(ref2.size()));
  out.rl = F1(static_cast<double>(LcsLength(cand, ref)),
              static_cast<double>(cand.size()), static_cast<double>(ref.size()));
  return out;
}

RougeTriple TopKRouge(std::span<const std::string> candidates,
                      std::string_view reference) {
  Require(!candidates.empty(), ErrorCode::kInvalidArgument,
          "TopK-ROUGE needs at least one candidate");
  RougeTriple best = Rouge(candidates[0], reference);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const RougeTriple r = Rouge(candidates[i], reference);
    best.r1 = std::max(best.r1, r.r1);
    best.r2 = std::max(best.r2, r.r2);
    best.rl = std::max(best.rl, r.rl);
  }
  return best;
}

double StyleSigma(std::span<const double> values) {
  Require(values.size() >= 2, ErrorCode::kInvalidArgument,
          "stylistic sigma needs at least two candidates");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

double PairedBootstrap(std::span<const double> scores_a,
                       std::span<const double> scores_b,
                       std::size_t iterations, std::uint64_t seed) {
  Require(scores_a.size() == scores_b.size(), ErrorCode::kInvalidArgument,
          "paired bootstrap needs equal-length score lists");
  Require(!scores_a.empty(), ErrorCode::kInvalidArgument,
          "paired bootstrap needs at least one pair");
  Require(iterations >= 1000, ErrorCode::kInvalidArgument,
          "paired bootstrap needs at least 1000 iterations");
  const std::size_t n = scores_a.size();
  std::vector<double> diff(n);
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = scores_a[i] - scores_b[i];
    observed += diff[i];
  }
  observed /= static_cast<double>(n);
  if (observed == 0.0) return 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t flips = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += diff[pick(rng)];
    if ((observed > 0.0 && total <= 0.0) || (observed < 0.0 && total >= 0.0)) {
      ++flips;
    }
  }
  return std::min(1.0, 2.0 * static_cast<double>(flips) /
                           static_cast<double>(iterations));
}

StyleScores ComputeStyleScores(std::string_view article,
                               std::string_view summary,
                               const SpecificityScorer& scorer) {
  const std::vector<std::string> a = NormalizedWords(article);
  const std::vector<std::string> s = NormalizedWords(summary);
  StyleScores out;
  out.abs_length = static_cast<double>(s.size());
  out.compression = a.empty() ? kNaN : out.abs_length / static_cast<double>(a.size());
  if (s.empty()) {
    out.coverage = out.density = out.overlap2 = kNaN;
    out.specificity = out.readability = kNaN;
    return out;
  }
  const CoverageDensity cd = ComputeCoverageDensity(ExtractiveFragments(a, s), s.size());
  out.coverage = cd.coverage;
  out.density = cd.density;
  out.overlap2 = s.size() >= 2 ? NgramOverlap(a, s, 2) : kNaN;
  out.specificity = SummarySpecificity(summary, scorer);
  out.readability = FleschReadingEase(summary);
  return out;
}

}  // namespace hydra::metrics
