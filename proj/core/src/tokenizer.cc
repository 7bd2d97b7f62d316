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

#include "hydra/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "hydra/error.h"

namespace hydra {
namespace {

const std::vector<std::string>& ReservedTokens() {
  static const std::vector<std::string> kReserved = {"<pad>", "<bos>", "<eos>",
                                                     "<unk>"};
  return kReserved;
}

bool IsWordChar(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool IsSentenceEnd(char c) { return c == '.' || c == '!' || c == '?'; }

std::string Trim(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return std::string(s.substr(begin, end - begin));
}

}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsWordChar(c)) {
      current.push_back(ch);
      continue;
    }
    if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
    if (!std::isspace(c)) words.emplace_back(1, ch);
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<std::string> NormalizedTokens(std::string_view text) {
  std::vector<std::string> words = SplitWords(text);
  for (std::string& w : words) {
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
  }
  return words;
}

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!IsSentenceEnd(text[i])) continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      std::string sentence = Trim(text.substr(start, i + 1 - start));
      if (!sentence.empty()) sentences.push_back(std::move(sentence));
      start = i + 1;
    }
  }
  if (start < text.size()) {
    std::string tail = Trim(text.substr(start));
    if (!tail.empty()) sentences.push_back(std::move(tail));
  }
  return sentences;
}

Vocabulary::Vocabulary() : tokens_(ReservedTokens()) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], static_cast<int>(i));
  }
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens) {
  Require(tokens.size() >= kNumReserved, ErrorCode::kValidation,
          "vocabulary is missing the reserved tokens");
  for (int i = 0; i < kNumReserved; ++i) {
    Require(tokens[static_cast<std::size_t>(i)] == ReservedTokens()[static_cast<std::size_t>(i)],
            ErrorCode::kValidation,
            "vocabulary line " + std::to_string(i + 1) + " must be " +
                ReservedTokens()[static_cast<std::size_t>(i)]);
  }
  Vocabulary vocab;
  vocab.tokens_ = std::move(tokens);
  vocab.index_.clear();
  vocab.index_.reserve(vocab.tokens_.size());
  for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
    const bool inserted =
        vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i)).second;
    Require(inserted, ErrorCode::kValidation,
            "duplicate vocabulary token '" + vocab.tokens_[i] + "'");
  }
  return vocab;
}

Vocabulary Vocabulary::Build(std::span<const std::string> corpus,
                             std::size_t min_freq, std::size_t max_size) {
  Require(!corpus.empty(), ErrorCode::kInvalidArgument,
          "cannot build a vocabulary from an empty corpus");
  Require(min_freq >= 1, ErrorCode::kInvalidArgument, "min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : corpus) {
    for (std::string& token : NormalizedTokens(text)) ++counts[token];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, count] : counts) {
    if (count < min_freq) continue;
    if (std::find(ReservedTokens().begin(), ReservedTokens().end(), token) !=
        ReservedTokens().end()) {
      continue;
    }
    ranked.emplace_back(token, count);
  }
  // counts is ordered lexicographically, so a stable sort on frequency keeps
  // the lexicographic tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (max_size > 0 && ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens = ReservedTokens();
  for (auto& [token, count] : ranked) tokens.push_back(token);
  return FromTokens(std::move(tokens));
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return FromTokens(std::move(tokens));
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write vocabulary " + path.string());
  for (const std::string& token : tokens_) out << token << '\n';
  Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<int> Vocabulary::EncodeWords(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& token : NormalizedTokens(text)) {
    ids.push_back(Id(token));
  }
  return ids;
}

std::vector<int> Vocabulary::Encode(std::string_view text) const {
  std::vector<int> ids = {kBosId};
  for (int id : EncodeWords(text)) ids.push_back(id);
  ids.push_back(kEosId);
  return ids;
}

std::string Vocabulary::Decode(std::span<const int> ids) const {
  std::string text;
  for (int id : ids) {
    const std::string& token = Token(id);
    if (id < kNumReserved) continue;
    if (!text.empty()) text.push_back(' ');
    text += token;
  }
  return text;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::Contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

const std::string& Vocabulary::Token(int id) const {
  Require(id >= 0 && static_cast<std::size_t>(id) < tokens_.size(),
          ErrorCode::kIndex,
          "token id " + std::to_string(id) + " outside vocabulary of " +
              std::to_string(tokens_.size()));
  return tokens_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::Fingerprint() const {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const std::string& token : tokens_) {
    for (char c : token) {
      hash ^= static_cast<unsigned char>(c);
      hash *= 1099511628211ULL;
    }
    hash ^= static_cast<unsigned char>('\n');
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace hydra
