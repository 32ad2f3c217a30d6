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

#include <cmath>
#include <random>
#include <vector>

#include "papb/error.hpp"
#include "papb/model/checkpoint.hpp"
#include "papb/model/seq2seq.hpp"
#include "test_util.hpp"

namespace papb::model {
namespace {

using testing::random_matrix;

class ModelTest : public ::testing::Test {
 protected:
  ModelConfig cfg = testing::tiny_config(5, 3);
  Seq2Seq net = Seq2Seq::initialize(cfg, 17);
  std::mt19937_64 rng{23};
};

TEST_F(ModelTest, InitializationIsSeededAndBounded) {
  const Seq2Seq again = Seq2Seq::initialize(cfg, 17);
  EXPECT_EQ(again.flatten(), net.flatten());
  const Seq2Seq other = Seq2Seq::initialize(cfg, 18);
  EXPECT_NE(other.flatten(), net.flatten());
  for (const auto &p : net.params()) {
    const bool is_bias = p.name.size() > 2 && p.name.substr(p.name.size() - 2) == ".b" &&
                         p.name.rfind("att.", 0) != 0 && p.name.rfind("out.", 0) != 0;
    if (is_bias) {
      // Gate order i, f, g, o: the forget block holds the configured bias.
      const int u = static_cast<int>(p.value.rows()) / 4;
      for (int r = 0; r < u; ++r) EXPECT_DOUBLE_EQ(p.value(u + r, 0), cfg.forget_bias) << p.name;
    } else {
      EXPECT_LE(p.value.cwiseAbs().maxCoeff(), cfg.init_range) << p.name;
    }
  }
}

TEST_F(ModelTest, OutputProjectionCoversWholeVocabulary) {
  const auto &lay = net.layout();
  EXPECT_EQ(net.params()[lay.out_W].value.rows(), cfg.vocab_size);
  EXPECT_EQ(net.params()[lay.out_b].value.rows(), cfg.vocab_size);
}

TEST_F(ModelTest, EncodeIsBitwiseDeterministic) {
  const Matrix x = random_matrix(5, 3, rng);
  ForwardPass a(net), b(net);
  EXPECT_EQ(a.graph().value(a.encode(x).H), b.graph().value(b.encode(x).H));
}

TEST_F(ModelTest, SingleFrameGivesSingleState) {
  ForwardPass fp(net);
  const EncoderOutput enc = fp.encode(random_matrix(1, 3, rng));
  EXPECT_EQ(enc.frames, 1);
  EXPECT_EQ(fp.graph().value(enc.H).cols(), 1);
  EXPECT_EQ(fp.graph().value(enc.H).rows(), 2 * cfg.encoder_units);
}

TEST_F(ModelTest, EncodeRejectsBadShapes) {
  ForwardPass fp(net);
  EXPECT_THROW(fp.encode(Matrix(0, 3)), ArgumentError);
  EXPECT_THROW(fp.encode(random_matrix(4, 2, rng)), ArgumentError);
}

TEST_F(ModelTest, EncoderGradientMatchesFiniteDifferences) {
  const Matrix x = random_matrix(4, 3, rng);
  const auto r = testing::model_gradcheck(net, [&](ForwardPass &fp) {
    const ad::Var H = fp.encode(x).H;
    return fp.graph().sum(fp.graph().mul(H, H));
  });
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST_F(ModelTest, SingleFrameAttentionIsOne) {
  ForwardPass fp(net);
  const EncoderOutput enc = fp.encode(random_matrix(1, 3, rng));
  const Attention att = fp.attend(fp.initial_context(enc), enc);
  EXPECT_NEAR(fp.graph().value(att.weights)(0, 0), 1.0, 1e-15);
  EXPECT_LT((fp.graph().value(att.summary) - fp.graph().value(enc.H)).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST_F(ModelTest, EqualStatesGiveThatStateAsSummary) {
  ForwardPass fp(net);
  ad::Graph &g = fp.graph();
  const Matrix v = random_matrix(2 * cfg.encoder_units, 1, rng);
  EncoderOutput enc;
  enc.frames = 6;
  enc.H = g.constant(v.replicate(1, 6));
  enc.keys = g.constant(random_matrix(cfg.attention_dim, 6, rng));
  DecoderContext ctx = fp.initial_context(enc);
  ctx.h[0] = g.constant(random_matrix(cfg.decoder_units, 1, rng));
  const Attention att = fp.attend(ctx, enc);
  EXPECT_LT((g.value(att.summary) - v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(ModelTest, AttentionWeightsFormADistribution) {
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 1 + trial % 6;
    ForwardPass fp(net);
    const EncoderOutput enc = fp.encode(random_matrix(T, 3, rng, -3.0, 3.0));
    DecoderContext ctx = fp.initial_context(enc);
    for (int step = 0; step < 3; ++step) {
      const Attention att = fp.attend(ctx, enc);
      const Matrix &a = fp.graph().value(att.weights);
      EXPECT_NEAR(a.sum(), 1.0, 1e-12);
      EXPECT_GE(a.minCoeff(), 0.0);
      StepOutput so = fp.decode_step(att.summary, ctx, att.weights);
      ctx = so.ctx;
      ctx.y_prev = 2 + step % 3;
    }
  }
}

TEST_F(ModelTest, AttendRejectsLengthMismatch) {
  ForwardPass fp(net);
  const EncoderOutput enc = fp.encode(random_matrix(4, 3, rng));
  DecoderContext ctx = fp.initial_context(enc);
  ctx.a_prev = fp.graph().constant(Matrix::Constant(3, 1, 1.0 / 3));
  EXPECT_THROW(fp.attend(ctx, enc), ArgumentError);
}

TEST_F(ModelTest, DecodeStepNormalizedAndArgmaxConsistent) {
  for (int trial = 0; trial < 10; ++trial) {
    ForwardPass fp(net);
    const EncoderOutput enc = fp.encode(random_matrix(3, 3, rng));
    const StepOutput so = fp.step(fp.initial_context(enc), enc);
    const Matrix &s = fp.graph().value(so.logits);
    const Matrix &lp = fp.graph().value(so.logp);
    ASSERT_EQ(s.rows(), cfg.vocab_size);
    ASSERT_EQ(lp.rows(), cfg.vocab_size);
    double mass = 0.0;
    for (int k = 1; k < cfg.vocab_size; ++k) mass += std::exp(lp(k, 0));
    EXPECT_NEAR(mass, 1.0, 1e-10);
    EXPECT_TRUE(std::isinf(lp(kSosId, 0)) && lp(kSosId, 0) < 0);
    int best = 1;
    for (int k = 2; k < cfg.vocab_size; ++k)
      if (s(k, 0) > s(best, 0)) best = k;
    EXPECT_EQ(argmax_token(lp), best);
  }
}

TEST_F(ModelTest, DecodeStepRejectsUnknownToken) {
  ForwardPass fp(net);
  const EncoderOutput enc = fp.encode(random_matrix(3, 3, rng));
  DecoderContext ctx = fp.initial_context(enc);
  ctx.y_prev = cfg.vocab_size;
  EXPECT_THROW(fp.step(ctx, enc), ArgumentError);
}

TEST_F(ModelTest, StepLogProbGradientMatchesFiniteDifferences) {
  const Matrix x = random_matrix(4, 3, rng);
  for (int k : {1, 3}) {
    const auto r = testing::model_gradcheck(net, [&](ForwardPass &fp) {
      const EncoderOutput enc = fp.encode(x);
      DecoderContext ctx = fp.initial_context(enc);
      StepOutput so = fp.step(ctx, enc);
      ctx = so.ctx;
      ctx.y_prev = 2;
      so = fp.step(ctx, enc);
      return fp.graph().pick(so.logp, k);
    });
    EXPECT_LE(r.max_rel_error, 1e-4) << "k=" << k;
  }
}

TEST_F(ModelTest, SequenceLogProbIsSumOfSteps) {
  const Matrix x = random_matrix(5, 3, rng);
  const std::vector<int> y{3, 2, 4, kEosId};
  ForwardPass fp(net);
  const EncoderOutput enc = fp.encode(x);
  DecoderContext ctx = fp.initial_context(enc);
  double sum = 0.0;
  for (int tok : y) {
    const StepOutput so = fp.step(ctx, enc);
    sum += fp.graph().value(so.logp)(tok, 0);
    ctx = so.ctx;
    ctx.y_prev = tok;
  }
  EXPECT_NEAR(sequence_log_prob(net, x, y), sum, 1e-12);
  EXPECT_LE(sum, 0.0);
}

TEST_F(ModelTest, LongerPrefixNeverMoreProbable) {
  const Matrix x = random_matrix(5, 3, rng);
  std::vector<int> prefix;
  double prev = 0.0;
  for (int tok : {2, 3, 3, 4}) {
    // log p(prefix) as the sum of the non-terminal step terms.
    prefix.push_back(tok);
    ForwardPass fp(net);
    const EncoderOutput enc = fp.encode(x);
    DecoderContext ctx = fp.initial_context(enc);
    double lp = 0.0;
    for (int t : prefix) {
      const StepOutput so = fp.step(ctx, enc);
      lp += fp.graph().value(so.logp)(t, 0);
      ctx = so.ctx;
      ctx.y_prev = t;
    }
    EXPECT_LE(lp, prev);
    prev = lp;
  }
}

TEST_F(ModelTest, SequenceLogProbRejectsBadSequences) {
  const Matrix x = random_matrix(3, 3, rng);
  EXPECT_THROW(sequence_log_prob(net, x, std::vector<int>{}), ArgumentError);
  EXPECT_THROW(sequence_log_prob(net, x, std::vector<int>{2, 3}), ArgumentError);
  EXPECT_THROW(sequence_log_prob(net, x, std::vector<int>{9, kEosId}), ArgumentError);
  EXPECT_THROW(sequence_log_prob(net, x, std::vector<int>{kSosId, kEosId}), ArgumentError);
}

TEST_F(ModelTest, TerminatedMassPlusResidualIsOne) {
  const ModelConfig c = testing::tiny_config(4, 3);
  const Seq2Seq m = Seq2Seq::initialize(c, 5);
  const Matrix x = random_matrix(4, 3, rng);
  double total = 0.0;
  for (const auto &s : testing::all_strings({2, 3}, 2)) {
    auto y = s;
    y.push_back(kEosId);
    total += std::exp(sequence_log_prob(m, x, y));
  }
  for (const auto &s : testing::all_strings({2, 3}, 3))
    if (s.size() == 3) total += std::exp(sequence_log_prob(m, x, std::vector<int>{s[0], s[1], s[2], kEosId}));
  for (const auto &s : testing::all_strings({2, 3}, 3))
    if (s.size() == 3) total += testing::continuation_mass(m, x, s);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(ModelGradient, FullModelCrossEntropyWithinTolerance) {
  ModelConfig c = testing::tiny_config(5, 3);
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  c.encoder_units = 4;
  c.decoder_units = 5;
  const Seq2Seq m = Seq2Seq::initialize(c, 31);
  std::mt19937_64 rng(41);
  const Matrix x = random_matrix(6, 3, rng);
  const std::vector<int> y{2, 4, 3, kEosId};
  const auto r = testing::model_gradcheck(m, [&](ForwardPass &fp) {
    return fp.graph().scale(fp.sequence_log_prob(fp.encode(x), y), -1.0);
  });
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(ModelConfigTest, ValidationRejectsBadDims) {
  ModelConfig c = testing::tiny_config();
  c.encoder_units = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = testing::tiny_config();
  c.vocab_size = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Checkpoint, RoundTripIsExact) {
  ModelConfig c = testing::tiny_config(5, 3);
  c.symbols = {"<sos>", "<eos>", "<unk>", "a", "b"};
  const Seq2Seq m = Seq2Seq::initialize(c, 3);
  const std::string bytes = serialize_checkpoint(m);
  const Seq2Seq back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.flatten(), m.flatten());
  EXPECT_EQ(back.config().symbols, c.symbols);
  EXPECT_EQ(config_digest(back.config()), config_digest(m.config()));
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  ASSERT_EQ(back.params().size(), m.params().size());
  for (std::size_t i = 0; i < m.params().size(); ++i)
    EXPECT_EQ(back.params()[i].name, m.params()[i].name);
}

TEST(Checkpoint, HeaderLayout) {
  const Seq2Seq m = Seq2Seq::initialize(testing::tiny_config(), 3);
  const std::string bytes = serialize_checkpoint(m);
  ASSERT_GT(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "PAPBCKPT");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), kCheckpointVersion);
  EXPECT_EQ(bytes[9], 0);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const Seq2Seq m = Seq2Seq::initialize(testing::tiny_config(), 3);
  const std::string bytes = serialize_checkpoint(m);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), DataError);
  bad = bytes;
  bad[12] ^= 0x01;  // inside the config digest
  EXPECT_THROW(deserialize_checkpoint(bad), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), IoError);
}

TEST(Checkpoint, ConfigJsonRejectsUnknownKeys) {
  nlohmann::json j = to_json(testing::tiny_config());
  EXPECT_NO_THROW(model_config_from_json(j));
  j["dropout"] = 0.1;
  EXPECT_THROW(model_config_from_json(j), ConfigError);
}

}  // namespace
}  // namespace papb::model
