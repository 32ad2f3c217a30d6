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

#include "papb/textmetrics/edit_distance.hpp"

#include "papb/error.hpp"

namespace papb::text {

int cer_count(std::span<const int> ref, std::span<const int> hyp) {
  return edit_distance<int>(ref, hyp).total;
}

int prefix_cer(std::span<const int> ref, std::span<const int> hyp, int l) {
  if (l < 0) throw ArgumentError("prefix_cer: negative prefix length");
  const std::size_t len = static_cast<std::size_t>(l);
  return edit_distance<int>(ref.first(std::min(len, ref.size())),
                            hyp.first(std::min(len, hyp.size())))
      .total;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? text.size() : next;
    if (end > pos) words.emplace_back(text.substr(pos, end - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return words;
}

EditStats word_edits(std::string_view ref_text, std::string_view hyp_text) {
  const auto r = split_words(ref_text);
  const auto h = split_words(hyp_text);
  return edit_distance<std::string>(r, h);
}

double wer(std::string_view ref_text, std::string_view hyp_text) {
  const auto r = split_words(ref_text);
  const auto h = split_words(hyp_text);
  const int edits = edit_distance<std::string>(r, h).total;
  if (r.empty()) return static_cast<double>(edits);
  return static_cast<double>(edits) / static_cast<double>(r.size());
}

std::size_t select_pseudo_true(std::span<const NBestEntry> nbest,
                               std::span<const int> ref) {
  if (nbest.empty()) throw ArgumentError("select_pseudo_true: empty N-best list");
  std::size_t best = 0;
  int best_cer = cer_count(ref, nbest[0].tokens);
  for (std::size_t i = 1; i < nbest.size(); ++i) {
    const int c = cer_count(ref, nbest[i].tokens);
    if (c < best_cer || (c == best_cer && nbest[i].logprob > nbest[best].logprob)) {
      best = i;
      best_cer = c;
    }
  }
  return best;
}

}  // namespace papb::text
