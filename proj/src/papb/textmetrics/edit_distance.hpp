// Copyright 2026 The papb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace papb::text {

struct EditStats {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int total = 0;
};

/// Unit-cost Levenshtein alignment of `hyp` against `ref`. The backtrace
/// runs from the end and prefers the diagonal (match or substitution), then
/// insertion (extra hyp token), then deletion (missing ref token).
template <class T>
EditStats edit_distance(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<int> d((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) d[i * w] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = d[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int ins = d[i * w + j - 1] + 1;
      const int del = d[(i - 1) * w + j] + 1;
      d[i * w + j] = std::min({diag, ins, del});
    }
  }
  EditStats s;
  s.total = d[n * w + m];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const int here = d[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (here == d[(i - 1) * w + j - 1] + (same ? 0 : 1)) {
        if (!same) ++s.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && here == d[i * w + j - 1] + 1) {
      ++s.insertions;
      --j;
    } else {
      ++s.deletions;
      --i;
    }
  }
  return s;
}

/// Raw edit-distance count between token sequences.
int cer_count(std::span<const int> ref, std::span<const int> hyp);

/// Edit distance between the first min(l, |ref|) reference tokens and the
/// first min(l, |hyp|) hypothesis tokens.
int prefix_cer(std::span<const int> ref, std::span<const int> hyp, int l);

/// Words of `text`, split on spaces; empty fields are dropped.
std::vector<std::string> split_words(std::string_view text);

/// Word-level edit distance and reference word count.
EditStats word_edits(std::string_view ref_text, std::string_view hyp_text);

/// Word error rate as a ratio. An empty reference scores |hyp words|.
double wer(std::string_view ref_text, std::string_view hyp_text);

struct NBestEntry {
  std::vector<int> tokens;
  double logprob = 0.0;
};

/// Index of the entry with the lowest cer_count against `ref`; ties go to
/// the higher logprob, then the lower index.
std::size_t select_pseudo_true(std::span<const NBestEntry> nbest,
                               std::span<const int> ref);

}  // namespace papb::text
