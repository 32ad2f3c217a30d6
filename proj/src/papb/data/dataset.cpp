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

#include "papb/data/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "papb/error.hpp"

namespace papb::data {

namespace {

const char *const kReserved[] = {"<sos>", "<eos>", "<unk>"};

std::string read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed for " + path);
}

class Normal {
 public:
  explicit Normal(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t raw() { return rng_(); }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::string synth_symbol(int i) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  if (i < static_cast<int>(alphabet.size())) return std::string(1, alphabet[i]);
  throw ArgumentError("synth_transduce: vocab_size above " +
                      std::to_string(alphabet.size()) + " is not supported");
}

void validate(const SynthParams &p) {
  if (p.vocab_size < 2) throw ArgumentError("synth_transduce: vocab_size must be >= 2");
  if (p.len_min < 1 || p.len_min > p.len_max)
    throw ArgumentError("synth_transduce: need 1 <= len_min <= len_max");
  if (p.n < 1) throw ArgumentError("synth_transduce: n must be >= 1");
  if (!(p.noise_sigma >= 0.0)) throw ArgumentError("synth_transduce: noise_sigma must be >= 0");
  if (p.frames_per_char < 1)
    throw ArgumentError("synth_transduce: frames_per_char must be >= 1");
  if (p.feat_dim < 1) throw ArgumentError("synth_transduce: feat_dim must be >= 1");
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xf0) len = 4;
    else if (c >= 0xe0) len = 3;
    else if (c >= 0xc0) len = 2;
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Vocab::Vocab() {
  for (const char *r : kReserved) add(r);
}

Vocab::Vocab(const std::vector<std::string> &symbols) {
  if (symbols.size() < 3 || symbols[0] != kReserved[0] || symbols[1] != kReserved[1] ||
      symbols[2] != kReserved[2])
    throw DataError("vocab: entries 0/1/2 must be <sos>, <eos>, <unk>");
  for (const auto &s : symbols) {
    if (index_.count(s)) throw DataError("vocab: duplicate symbol '" + s + "'");
    index_[s] = static_cast<int>(symbols_.size());
    symbols_.push_back(s);
  }
}

int Vocab::add(const std::string &ch) {
  auto it = index_.find(ch);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  symbols_.push_back(ch);
  index_[ch] = id;
  return id;
}

int Vocab::id(const std::string &ch) const {
  auto it = index_.find(ch);
  return it == index_.end() ? 2 : it->second;
}

const std::string &Vocab::symbol(int id) const {
  if (id < 0 || id >= size()) throw ArgumentError("vocab: id out of range");
  return symbols_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(std::string_view text, int *unknown) const {
  std::vector<int> ids;
  for (const auto &ch : utf8_chars(text)) {
    const int i = id(ch);
    if (i == 2 && unknown) ++*unknown;
    ids.push_back(i);
  }
  return ids;
}

std::string Vocab::decode(const std::vector<int> &ids) const {
  std::string out;
  for (int i : ids) {
    if (i == 2) out += kUnknownGlyph;
    if (i <= 2 || i >= size()) continue;
    out += symbols_[static_cast<std::size_t>(i)];
  }
  return out;
}

Vocab load_vocab(const std::string &path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> symbols;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    symbols.push_back(line);
  }
  return Vocab(symbols);
}

void save_vocab(const Vocab &vocab, const std::string &path) {
  std::string out;
  for (const auto &s : vocab.symbols()) out += s + "\n";
  write_file(path, out);
}

Dataset parse_jsonl(std::string_view content, const Vocab &vocab, LoadReport *report) {
  Dataset ds;
  ds.vocab = vocab;
  LoadReport rep;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    Utterance u;
    try {
      u.id = rec.at("id").get<std::string>();
      u.text = rec.at("text").get<std::string>();
      const auto &feat = rec.at("feat");
      if (!feat.is_array() || feat.empty())
        throw DataError("utterance " + u.id + ": feat must be a non-empty array of frames");
      const auto T = static_cast<Eigen::Index>(feat.size());
      const auto d = static_cast<Eigen::Index>(feat[0].size());
      if (d == 0) throw DataError("utterance " + u.id + ": empty frame");
      u.feats.resize(T, d);
      for (Eigen::Index t = 0; t < T; ++t) {
        const auto &frame = feat[static_cast<std::size_t>(t)];
        if (!frame.is_array() || static_cast<Eigen::Index>(frame.size()) != d)
          throw DataError("utterance " + u.id + ": frame " + std::to_string(t) +
                          " has a different dimension");
        for (Eigen::Index k = 0; k < d; ++k)
          u.feats(t, k) = frame[static_cast<std::size_t>(k)].get<double>();
      }
    } catch (const nlohmann::json::exception &e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (ds.feat_dim == 0) ds.feat_dim = static_cast<int>(u.feats.cols());
    if (u.feats.cols() != ds.feat_dim)
      throw DataError("utterance " + u.id + ": feature dim " +
                      std::to_string(u.feats.cols()) + " differs from " +
                      std::to_string(ds.feat_dim));
    u.target = vocab.encode(u.text, &rep.unknown_chars);
    ds.utterances.push_back(std::move(u));
  }
  rep.empty = ds.utterances.empty();
  if (rep.empty) std::cerr << "warning: dataset has no utterances\n";
  if (rep.unknown_chars > 0)
    std::cerr << "warning: " << rep.unknown_chars
              << " characters outside the vocabulary were mapped to <unk>\n";
  if (report) *report = rep;
  return ds;
}

Dataset load_jsonl(const std::string &path, const std::string &vocab_path,
                   LoadReport *report) {
  const Vocab vocab = load_vocab(vocab_path);
  return parse_jsonl(read_file(path), vocab, report);
}

std::string to_jsonl(const Dataset &dataset) {
  std::string out;
  for (const Utterance &u : dataset.utterances) {
    nlohmann::json rec;
    rec["id"] = u.id;
    nlohmann::json feat = nlohmann::json::array();
    for (Eigen::Index t = 0; t < u.feats.rows(); ++t) {
      nlohmann::json frame = nlohmann::json::array();
      for (Eigen::Index k = 0; k < u.feats.cols(); ++k) frame.push_back(u.feats(t, k));
      feat.push_back(std::move(frame));
    }
    rec["feat"] = std::move(feat);
    rec["text"] = u.text;
    out += rec.dump() + "\n";
  }
  return out;
}

void save_jsonl(const Dataset &dataset, const std::string &path) {
  write_file(path, to_jsonl(dataset));
}

Matrix synth_embeddings(const SynthParams &params) {
  validate(params);
  Normal rng(params.seed);
  Matrix emb = Matrix::Zero(3 + params.vocab_size, params.feat_dim);
  for (int c = 0; c < params.vocab_size; ++c)
    for (int k = 0; k < params.feat_dim; ++k) emb(3 + c, k) = rng.gauss();
  return emb;
}

Dataset synth_transduce(const SynthParams &params) {
  validate(params);
  Normal rng(params.seed);
  Dataset ds;
  for (int c = 0; c < params.vocab_size; ++c) ds.vocab.add(synth_symbol(c));
  ds.feat_dim = params.feat_dim;
  // Same draw sequence as synth_embeddings.
  Matrix emb = Matrix::Zero(3 + params.vocab_size, params.feat_dim);
  for (int c = 0; c < params.vocab_size; ++c)
    for (int k = 0; k < params.feat_dim; ++k) emb(3 + c, k) = rng.gauss();
  const auto span = static_cast<std::uint64_t>(params.len_max - params.len_min + 1);
  for (int n = 0; n < params.n; ++n) {
    Utterance u;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05d", n);
    u.id = id;
    const int len = params.len_min + static_cast<int>(rng.raw() % span);
    for (int i = 0; i < len; ++i) {
      const int c = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(params.vocab_size));
      u.target.push_back(3 + c);
      u.text += synth_symbol(c);
    }
    const int T = len * params.frames_per_char;
    u.feats.resize(T, params.feat_dim);
    for (int t = 0; t < T; ++t) {
      const int ch = u.target[static_cast<std::size_t>(t / params.frames_per_char)];
      for (int k = 0; k < params.feat_dim; ++k) {
        const double noise = params.noise_sigma > 0.0 ? params.noise_sigma * rng.gauss() : 0.0;
        u.feats(t, k) = emb(ch, k) + noise;
      }
    }
    ds.utterances.push_back(std::move(u));
  }
  return ds;
}

Dataset split_tail(Dataset &dataset, std::size_t first) {
  if (first > dataset.utterances.size()) throw ArgumentError("split_tail: index out of range");
  Dataset tail;
  tail.vocab = dataset.vocab;
  tail.feat_dim = dataset.feat_dim;
  auto begin = dataset.utterances.begin() + static_cast<std::ptrdiff_t>(first);
  tail.utterances.assign(std::make_move_iterator(begin),
                         std::make_move_iterator(dataset.utterances.end()));
  dataset.utterances.erase(begin, dataset.utterances.end());
  return tail;
}

}  // namespace papb::data
