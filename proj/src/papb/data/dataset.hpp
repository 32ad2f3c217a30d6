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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "papb/autodiff/graph.hpp"

namespace papb::data {

using ad::Matrix;

inline constexpr const char *kUnknownGlyph = "\xEF\xBF\xBD";

/// Character table. Ids 0, 1 and 2 are <sos>, <eos> and <unk>.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string> &symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string> &symbols() const { return symbols_; }
  /// Adds a character if absent and returns its id.
  int add(const std::string &ch);
  /// Id of a character, or <unk>.
  int id(const std::string &ch) const;
  bool contains(const std::string &ch) const { return index_.count(ch) != 0; }
  const std::string &symbol(int id) const;

  /// Maps text to ids; characters outside the table become <unk> and are
  /// counted in *unknown when given.
  std::vector<int> encode(std::string_view text, int *unknown = nullptr) const;
  /// Concatenates the symbols of character ids. <unk> becomes one U+FFFD
  /// character so text-level edit counts match id-level ones; other
  /// reserved ids are skipped.
  std::string decode(const std::vector<int> &ids) const;

  bool operator==(const Vocab &o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::map<std::string, int> index_;
};

/// Splits UTF-8 text into one string per code point.
std::vector<std::string> utf8_chars(std::string_view text);

struct Utterance {
  std::string id;
  Matrix feats;  // T x d, one frame per row
  std::string text;
  std::vector<int> target;  // character ids, no <eos>

  bool operator==(const Utterance &o) const {
    return id == o.id && text == o.text && target == o.target && feats == o.feats;
  }
};

struct Dataset {
  std::vector<Utterance> utterances;
  Vocab vocab;
  int feat_dim = 0;

  bool operator==(const Dataset &o) const {
    return utterances == o.utterances && vocab == o.vocab && feat_dim == o.feat_dim;
  }
};

struct LoadReport {
  int unknown_chars = 0;
  bool empty = false;
};

Vocab load_vocab(const std::string &path);
void save_vocab(const Vocab &vocab, const std::string &path);

/// Reads {"id", "feat", "text"} records, one per line. Blank lines are
/// skipped.
Dataset load_jsonl(const std::string &path, const std::string &vocab_path,
                   LoadReport *report = nullptr);
Dataset parse_jsonl(std::string_view content, const Vocab &vocab,
                    LoadReport *report = nullptr);
void save_jsonl(const Dataset &dataset, const std::string &path);
std::string to_jsonl(const Dataset &dataset);

struct SynthParams {
  int vocab_size = 8;
  int len_min = 3;
  int len_max = 10;
  int n = 500;
  double noise_sigma = 0.1;
  int frames_per_char = 3;
  int feat_dim = 8;
  std::uint64_t seed = 1;
};

/// Random character strings rendered as repeated per-character embeddings
/// plus Gaussian noise. Embeddings and strings are drawn from `seed`, so
/// splits of one call share the same embedding table.
Dataset synth_transduce(const SynthParams &params);

/// The per-character embeddings synth_transduce uses for `params`, indexed
/// by character id (reserved rows are zero).
Matrix synth_embeddings(const SynthParams &params);

/// Moves utterances [first, end) into a new dataset with the same vocab.
Dataset split_tail(Dataset &dataset, std::size_t first);

}  // namespace papb::data
