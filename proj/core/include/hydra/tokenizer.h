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

#ifndef HYDRA_TOKENIZER_H_
#define HYDRA_TOKENIZER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hydra {

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumReserved = 4;

// Splits on whitespace and punctuation boundaries: runs of letters/digits
// form one token, every other non-space character is its own token. Case is
// preserved.
std::vector<std::string> SplitWords(std::string_view text);

// SplitWords, lowercased.
std::vector<std::string> NormalizedTokens(std::string_view text);

// Sentence boundaries fall after '.', '!' or '?' when followed by whitespace
// or the end of the text. Sentences are trimmed; empty ones are dropped.
std::vector<std::string> SplitSentences(std::string_view text);

// Word-level vocabulary with reserved ids PAD=0, BOS=1, EOS=2, UNK=3.
class Vocabulary {
 public:
  // Only the reserved tokens.
  Vocabulary();

  // Tokens with count >= min_freq, most frequent first, ties broken
  // lexicographically. max_size caps the number of non-reserved entries
  // (0 means no cap).
  static Vocabulary Build(std::span<const std::string> corpus,
                          std::size_t min_freq, std::size_t max_size = 0);

  // One token per line; the first four lines are the reserved tokens.
  static Vocabulary Load(const std::filesystem::path& path);
  static Vocabulary FromTokens(std::vector<std::string> tokens);
  void Save(const std::filesystem::path& path) const;

  // [BOS, ids..., EOS]; out-of-vocabulary tokens map to UNK.
  std::vector<int> Encode(std::string_view text) const;
  // Token ids without BOS/EOS.
  std::vector<int> EncodeWords(std::string_view text) const;
  // Space-joined tokens with reserved ids dropped.
  std::string Decode(std::span<const int> ids) const;

  int Id(std::string_view token) const;
  bool Contains(std::string_view token) const;
  const std::string& Token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // FNV-1a over the serialized token list.
  std::uint64_t Fingerprint() const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace hydra

#endif  // HYDRA_TOKENIZER_H_
