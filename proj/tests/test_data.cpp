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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "papb/data/dataset.hpp"
#include "papb/error.hpp"

namespace papb::data {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("papb_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string &name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string &path, const std::string &content) {
  std::ofstream(path, std::ios::binary) << content;
}

SynthParams small_synth() {
  SynthParams p;
  p.vocab_size = 5;
  p.n = 20;
  p.feat_dim = 4;
  p.seed = 3;
  return p;
}

TEST(Vocab, ReservedEntriesComeFirst) {
  const Vocab v;
  ASSERT_EQ(v.size(), 3);
  EXPECT_EQ(v.symbol(0), "<sos>");
  EXPECT_EQ(v.symbol(1), "<eos>");
  EXPECT_EQ(v.symbol(2), "<unk>");
  EXPECT_THROW(Vocab(std::vector<std::string>{"a", "<eos>", "<unk>"}), DataError);
  EXPECT_THROW(Vocab(std::vector<std::string>{"<sos>", "<eos>", "<unk>", "a", "a"}), DataError);
}

TEST(Vocab, EncodeDecodeAndUnknownCounting) {
  Vocab v;
  v.add("a");
  v.add("b");
  v.add(" ");
  int unknown = 0;
  const std::vector<int> ids = v.encode("ab xa", &unknown);
  EXPECT_EQ(ids, (std::vector<int>{3, 4, 5, 2, 3}));
  EXPECT_EQ(unknown, 1);
  EXPECT_EQ(v.decode(ids), "ab \xEF\xBF\xBD" "a");
  EXPECT_EQ(v.id("z"), 2);
}

TEST(Vocab, MultiByteCharactersAreSingleSymbols) {
  EXPECT_EQ(utf8_chars("aé€😀"), (std::vector<std::string>{"a", "é", "€", "😀"}));
  Vocab v;
  v.add("é");
  EXPECT_EQ(v.encode("éé"), (std::vector<int>{3, 3}));
}

TEST(Vocab, FileRoundTrip) {
  TempDir dir;
  Vocab v;
  for (const char *s : {"a", "b", "é", " "}) v.add(s);
  save_vocab(v, dir.file("vocab.txt"));
  EXPECT_EQ(load_vocab(dir.file("vocab.txt")), v);
  EXPECT_THROW(load_vocab(dir.file("missing.txt")), IoError);
}

TEST(Jsonl, ParsesShapeAndTargets) {
  Vocab v;
  v.add("a");
  v.add("b");
  const std::string line =
      R"({"id":"u1","feat":[[1,2,3,4],[5,6,7,8],[9,10,11,12]],"text":"ab"})"
      "\n";
  LoadReport rep;
  const Dataset ds = parse_jsonl(line, v, &rep);
  ASSERT_EQ(ds.utterances.size(), 1u);
  const Utterance &u = ds.utterances[0];
  EXPECT_EQ(u.feats.rows(), 3);
  EXPECT_EQ(u.feats.cols(), 4);
  EXPECT_EQ(u.feats(2, 1), 10.0);
  EXPECT_EQ(u.target, (std::vector<int>{3, 4}));
  EXPECT_EQ(ds.feat_dim, 4);
  EXPECT_FALSE(rep.empty);
  EXPECT_EQ(rep.unknown_chars, 0);
}

TEST(Jsonl, EmptyInputGivesEmptyDataset) {
  LoadReport rep;
  const Dataset ds = parse_jsonl("\n  \n", Vocab(), &rep);
  EXPECT_TRUE(ds.utterances.empty());
  EXPECT_TRUE(rep.empty);
}

TEST(Jsonl, UnknownCharactersAreCounted) {
  Vocab v;
  v.add("a");
  LoadReport rep;
  const Dataset ds = parse_jsonl(R"({"id":"u","feat":[[0]],"text":"azza"})", v, &rep);
  EXPECT_EQ(rep.unknown_chars, 2);
  EXPECT_EQ(ds.utterances[0].target, (std::vector<int>{3, 2, 2, 3}));
}

TEST(Jsonl, MalformedLineReportsLineNumber) {
  const std::string content = R"({"id":"u","feat":[[0]],"text":""})"
                              "\n"
                              R"({"id":"v","feat":[[0]],"text":)"
                              "\n";
  try {
    parse_jsonl(content, Vocab());
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_jsonl(R"({"id":"u","text":"a"})", Vocab()), ParseError);
}

TEST(Jsonl, DimensionMismatchIsDataError) {
  EXPECT_THROW(parse_jsonl(R"({"id":"u","feat":[[0,1],[2]],"text":""})", Vocab()), DataError);
  const std::string two = R"({"id":"u","feat":[[0,1]],"text":""})"
                          "\n"
                          R"({"id":"v","feat":[[0,1,2]],"text":""})";
  EXPECT_THROW(parse_jsonl(two, Vocab()), DataError);
  EXPECT_THROW(parse_jsonl(R"({"id":"u","feat":[],"text":""})", Vocab()), DataError);
}

TEST(Jsonl, SaveLoadRoundTripIsExact) {
  TempDir dir;
  const Dataset ds = synth_transduce(small_synth());
  save_jsonl(ds, dir.file("d.jsonl"));
  save_vocab(ds.vocab, dir.file("v.txt"));
  EXPECT_EQ(load_jsonl(dir.file("d.jsonl"), dir.file("v.txt")), ds);
  EXPECT_THROW(load_jsonl(dir.file("nope.jsonl"), dir.file("v.txt")), IoError);
}

TEST(Synth, RespectsParameters) {
  const SynthParams p = small_synth();
  const Dataset ds = synth_transduce(p);
  ASSERT_EQ(ds.utterances.size(), static_cast<std::size_t>(p.n));
  EXPECT_EQ(ds.vocab.size(), 3 + p.vocab_size);
  EXPECT_EQ(ds.feat_dim, p.feat_dim);
  std::set<std::string> ids;
  for (const Utterance &u : ds.utterances) {
    EXPECT_TRUE(ids.insert(u.id).second);
    EXPECT_GE(u.target.size(), static_cast<std::size_t>(p.len_min));
    EXPECT_LE(u.target.size(), static_cast<std::size_t>(p.len_max));
    EXPECT_EQ(u.feats.rows(), static_cast<Eigen::Index>(u.target.size()) * p.frames_per_char);
    EXPECT_EQ(u.feats.cols(), p.feat_dim);
    EXPECT_EQ(ds.vocab.encode(u.text), u.target);
    for (int c : u.target) {
      EXPECT_GE(c, 3);
      EXPECT_LT(c, 3 + p.vocab_size);
    }
  }
}

TEST(Synth, DeterministicPerSeed) {
  SynthParams p = small_synth();
  EXPECT_EQ(synth_transduce(p), synth_transduce(p));
  SynthParams q = p;
  q.seed = 4;
  EXPECT_FALSE(synth_transduce(p) == synth_transduce(q));
}

TEST(Synth, NoiselessFramesDecodeByNearestEmbedding) {
  SynthParams p = small_synth();
  p.noise_sigma = 0.0;
  const Dataset ds = synth_transduce(p);
  const Matrix emb = synth_embeddings(p);
  for (const Utterance &u : ds.utterances) {
    for (Eigen::Index t = 0; t < u.feats.rows(); ++t) {
      int best = -1;
      double best_d = INFINITY;
      for (int c = 3; c < emb.rows(); ++c) {
        const double d = (emb.row(c) - u.feats.row(t)).squaredNorm();
        if (d < best_d) best_d = d, best = c;
      }
      EXPECT_EQ(best, u.target[static_cast<std::size_t>(t / p.frames_per_char)]);
      EXPECT_EQ(best_d, 0.0);
    }
  }
}

TEST(Synth, NoiseScaleMatchesSigma) {
  SynthParams p = small_synth();
  p.n = 200;
  p.noise_sigma = 0.5;
  const Dataset ds = synth_transduce(p);
  const Matrix emb = synth_embeddings(p);
  double ss = 0.0;
  long count = 0;
  for (const Utterance &u : ds.utterances)
    for (Eigen::Index t = 0; t < u.feats.rows(); ++t) {
      const int c = u.target[static_cast<std::size_t>(t / p.frames_per_char)];
      ss += (u.feats.row(t) - emb.row(c)).squaredNorm();
      count += p.feat_dim;
    }
  EXPECT_NEAR(std::sqrt(ss / count), 0.5, 0.02);
}

TEST(Synth, RejectsBadParameters) {
  SynthParams p = small_synth();
  p.vocab_size = 1;
  EXPECT_THROW(synth_transduce(p), ArgumentError);
  p = small_synth();
  p.len_min = 5;
  p.len_max = 4;
  EXPECT_THROW(synth_transduce(p), ArgumentError);
  p = small_synth();
  p.noise_sigma = -1.0;
  EXPECT_THROW(synth_transduce(p), ArgumentError);
}

TEST(Split, TailKeepsOrderAndVocab) {
  Dataset ds = synth_transduce(small_synth());
  const Dataset copy = ds;
  const Dataset tail = split_tail(ds, 15);
  ASSERT_EQ(ds.utterances.size(), 15u);
  ASSERT_EQ(tail.utterances.size(), 5u);
  EXPECT_EQ(tail.utterances[0], copy.utterances[15]);
  EXPECT_EQ(tail.vocab, copy.vocab);
  EXPECT_THROW(split_tail(ds, 99), ArgumentError);
}

}  // namespace
}  // namespace papb::data
