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

#ifndef HYDRA_TESTS_ORACLES_H_
#define HYDRA_TESTS_ORACLES_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hydra/metrics.h"

namespace hydra::testing {

// Longest-common-prefix table over every (summary, article) start pair, then
// the left-to-right greedy walk.
inline std::vector<metrics::Fragment> FragmentOracle(
    const std::vector<int>& article, const std::vector<int>& summary) {
  const std::size_t n = summary.size(), m = article.size();
  std::vector<std::size_t> table((n + 1) * (m + 1), 0);
  auto lcp = [&](std::size_t i, std::size_t j) -> std::size_t& { return table[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcp(i, j) = summary[i] == article[j] ? lcp(i + 1, j + 1) + 1 : 0;
    }
  }
  std::vector<metrics::Fragment> out;
  std::size_t i = 0;
  while (i < n) {
    std::size_t best = 0, where = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (lcp(i, j) > best) {
        best = lcp(i, j);
        where = j;
      }
    }
    if (best == 0) {
      ++i;
      continue;
    }
    out.push_back({i, where, best});
    i += best;
  }
  return out;
}

inline std::vector<std::string> Symbols(const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids) out.push_back(std::string(1, static_cast<char>('a' + id)));
  return out;
}

// Visits every sequence of the given length over `alphabet` symbols in
// canonical relabeled form: symbol s may appear only after 0..s-1 have.
inline void ForEachCanonicalSequence(std::size_t length, int alphabet,
                                     const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> seq(length);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int used) {
    if (pos == length) {
      visit(seq);
      return;
    }
    for (int s = 0; s <= used && s < alphabet; ++s) {
      seq[pos] = s;
      rec(pos + 1, s == used ? used + 1 : used);
    }
  };
  rec(0, 0);
}

struct FragmentSweep {
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
};

// Every (article, summary) split of every canonical sequence with total
// length <= max_total. Fragment results depend only on symbol equality, so
// canonical forms cover all sequences up to relabeling.
inline FragmentSweep ExhaustiveFragmentSweep(std::size_t max_total, int alphabet) {
  FragmentSweep sweep;
  for (std::size_t len = 0; len <= max_total; ++len) {
    ForEachCanonicalSequence(len, alphabet, [&](const std::vector<int>& seq) {
      const std::vector<std::string> words = Symbols(seq);
      for (std::size_t cut = 0; cut <= len; ++cut) {
        const std::vector<int> a(seq.begin(), seq.begin() + cut);
        const std::vector<int> s(seq.begin() + cut, seq.end());
        const std::span<const std::string> all(words);
        const auto got = metrics::ExtractiveFragments(all.first(cut), all.subspan(cut));
        ++sweep.pairs;
        if (got != FragmentOracle(a, s)) ++sweep.mismatches;
      }
    });
  }
  return sweep;
}

}  // namespace hydra::testing

#endif  // HYDRA_TESTS_ORACLES_H_
