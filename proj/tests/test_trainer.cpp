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

#include <numeric>

#include "papb/error.hpp"
#include "papb/textmetrics/edit_distance.hpp"
#include "papb/trainer/trainer.hpp"
#include "test_util.hpp"

namespace papb::train {
namespace {

using loss::Objective;

data::Dataset tiny_data(int n, std::uint64_t seed, double sigma = 0.1) {
  data::SynthParams p;
  p.vocab_size = 3;
  p.len_min = 1;
  p.len_max = 3;
  p.n = n;
  p.noise_sigma = sigma;
  p.frames_per_char = 2;
  p.feat_dim = 3;
  p.seed = seed;
  return data::synth_transduce(p);
}

model::ModelConfig small_model() {
  model::ModelConfig c = testing::tiny_config(6, 3);
  return c;
}

TrainConfig quick(int epochs) {
  TrainConfig c = TrainConfig::defaults_for(Objective::kCE);
  c.epochs = epochs;
  c.batch_size = 4;
  c.record_wall_time = false;
  return c;
}

TEST(TrainConfig, PhaseDefaults) {
  const TrainConfig ce = TrainConfig::defaults_for(Objective::kCE);
  EXPECT_EQ(ce.epochs, 20);
  EXPECT_EQ(ce.batch_size, 30);
  EXPECT_EQ(ce.lr, 1.0);
  for (auto o : {Objective::kMBR, Objective::kSM, Objective::kPAPB}) {
    const TrainConfig s = TrainConfig::defaults_for(o);
    EXPECT_EQ(s.epochs, 10);
    EXPECT_EQ(s.batch_size, 10);
    EXPECT_EQ(s.lr, 0.01);
    EXPECT_EQ(s.n_tr, 10);
  }
  EXPECT_EQ(ce.lr_decay_factor, 0.5);
}

TEST(TrainConfig, ValidationRejectsBadValues) {
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.lr_decay_factor = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.n_tr = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, OneEpochOnTwoUtterancesGivesOneRow) {
  const data::Dataset tr = tiny_data(2, 1), dev = tiny_data(2, 2);
  TrainConfig c = quick(1);
  const TrainResult r = train(small_model(), c, {}, tr, dev, nullptr);
  ASSERT_EQ(r.metrics.size(), 1u);
  EXPECT_EQ(r.metrics[0].epoch, 1);
  EXPECT_EQ(r.metrics[0].lr_used, 1.0);
  EXPECT_EQ(r.metrics[0].wall_seconds, 0.0);
  EXPECT_TRUE(std::isfinite(r.metrics[0].train_loss));
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(Train, SequenceObjectivesRequireWarmStart) {
  const data::Dataset tr = tiny_data(2, 1), dev = tiny_data(2, 2);
  for (auto o : {Objective::kMBR, Objective::kSM, Objective::kPAPB}) {
    loss::LossConfig lc;
    lc.objective = o;
    EXPECT_THROW(train(small_model(), quick(1), lc, tr, dev, nullptr), ConfigError);
  }
}

TEST(Train, RejectsEmptyOrMismatchedData) {
  const data::Dataset tr = tiny_data(2, 1), dev = tiny_data(2, 2);
  data::Dataset empty = tr;
  empty.utterances.clear();
  EXPECT_THROW(train(small_model(), quick(1), {}, empty, dev, nullptr), ConfigError);
  EXPECT_THROW(train(small_model(), quick(1), {}, tr, empty, nullptr), ConfigError);
  model::ModelConfig mc = small_model();
  mc.input_dim = 5;
  const model::Seq2Seq wrong = model::Seq2Seq::initialize(mc, 1);
  EXPECT_THROW(train(small_model(), quick(1), {}, tr, dev, &wrong), ConfigError);
}

TEST(Train, DeterministicAndBestCheckpointHasMinimumCer) {
  const data::Dataset tr = tiny_data(12, 1), dev = tiny_data(6, 2);
  const TrainConfig c = quick(4);
  const TrainResult a = train(small_model(), c, {}, tr, dev, nullptr);
  const TrainResult b = train(small_model(), c, {}, tr, dev, nullptr);
  ASSERT_EQ(a.metrics.size(), 4u);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].train_loss, b.metrics[i].train_loss);
    EXPECT_EQ(a.metrics[i].dev_cer, b.metrics[i].dev_cer);
  }
  EXPECT_EQ(a.best.flatten(), b.best.flatten());
  double lowest = INFINITY;
  int first_lowest = 0;
  for (const auto &m : a.metrics)
    if (m.dev_cer < lowest) lowest = m.dev_cer, first_lowest = m.epoch;
  EXPECT_EQ(a.best_epoch, first_lowest);
  EXPECT_DOUBLE_EQ(evaluate(a.best, dev, c.validation_beam).cer, lowest);
  EXPECT_DOUBLE_EQ(evaluate(a.last, dev, c.validation_beam).cer, a.metrics.back().dev_cer);
}

TEST(Train, LearningRateDecaysAfterStalledEpochs) {
  const data::Dataset tr = tiny_data(4, 1), dev = tiny_data(3, 2);
  TrainConfig c = quick(6);
  c.lr = 1e-9;  // nothing changes, so every epoch after the first stalls
  c.decay_patience = 2;
  const TrainResult r = train(small_model(), c, {}, tr, dev, nullptr);
  const std::vector<double> expect{1e-9, 1e-9, 1e-9, 5e-10, 5e-10, 2.5e-10};
  for (std::size_t i = 0; i < expect.size(); ++i)
    EXPECT_DOUBLE_EQ(r.metrics[i].lr_used, expect[i]) << "epoch " << i + 1;
}

TEST(Train, CallbackSeesEveryEpoch) {
  const data::Dataset tr = tiny_data(3, 1), dev = tiny_data(2, 2);
  std::vector<int> seen;
  train(small_model(), quick(3), {}, tr, dev, nullptr,
        [&](const EpochMetrics &m) { seen.push_back(m.epoch); });
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
}

TEST(Train, WarmStartedSequenceTrainingRuns) {
  const data::Dataset tr = tiny_data(4, 1), dev = tiny_data(3, 2);
  const TrainResult ce = train(small_model(), quick(2), {}, tr, dev, nullptr);
  for (auto o : {Objective::kMBR, Objective::kSM, Objective::kPAPB}) {
    loss::LossConfig lc;
    lc.objective = o;
    TrainConfig c = TrainConfig::defaults_for(o);
    c.epochs = 1;
    c.n_tr = 3;
    c.record_wall_time = false;
    const TrainResult r = train(small_model(), c, lc, tr, dev, &ce.best);
    ASSERT_EQ(r.metrics.size(), 1u);
    EXPECT_TRUE(std::isfinite(r.metrics[0].train_loss)) << loss::objective_name(o);
    EXPECT_EQ(r.last.config().symbols, ce.best.config().symbols);
  }
}

TEST(BatchGradient, IndependentOfUtteranceOrder) {
  const data::Dataset ds = tiny_data(5, 3);
  model::ModelConfig mc = small_model();
  mc.input_dim = ds.feat_dim;
  mc.vocab_size = ds.vocab.size();
  const model::Seq2Seq m = testing::sharp_model(mc, 2, 3.0);
  for (auto o : {Objective::kCE, Objective::kPAPB}) {
    loss::UtteranceOptions base;
    base.loss.objective = o;
    base.loss.teacher_forcing_prob = 0.5;
    base.beam_size = 3;
    const std::vector<std::size_t> fwd{0, 1, 2, 3, 4}, rev{4, 2, 0, 3, 1};
    const loss::LossValue a = batch_gradient(m, ds, fwd, base, 7, 1);
    const loss::LossValue b = batch_gradient(m, ds, rev, base, 7, 1);
    EXPECT_NEAR(a.value, b.value, 1e-12 * std::abs(a.value));
    for (std::size_t i = 0; i < a.grads.size(); ++i)
      EXPECT_LE((a.grads[i] - b.grads[i]).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(batch_gradient(m, ds, std::vector<std::size_t>{}, {}, 1, 1), ArgumentError);
}

TEST(BatchGradient, MeanOfUtteranceLosses) {
  const data::Dataset ds = tiny_data(3, 3);
  model::ModelConfig mc = small_model();
  const model::Seq2Seq m = testing::sharp_model(mc, 2, 3.0);
  loss::UtteranceOptions base;
  const std::vector<std::size_t> all{0, 1, 2};
  const loss::LossValue b = batch_gradient(m, ds, all, base, 7, 2);
  double sum = 0.0;
  for (std::size_t i : all) {
    loss::UtteranceOptions o = base;
    o.seed = utterance_seed(7, 2, i);
    sum += loss::utterance_loss_value(m, ds.utterances[i].feats, ds.utterances[i].target, o);
  }
  EXPECT_NEAR(b.value, sum / 3.0, 1e-12);
}

TEST(ClipGlobalNorm, ScalesOnlyAboveThreshold) {
  std::vector<ad::Matrix> g{ad::Matrix::Constant(1, 1, 3.0), ad::Matrix::Constant(1, 1, 4.0)};
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(g[0](0, 0), 3.0);
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0](0, 0), 0.6, 1e-15);
  EXPECT_NEAR(g[1](0, 0), 0.8, 1e-15);
  std::vector<ad::Matrix> h{ad::Matrix::Constant(1, 1, 30.0)};
  clip_global_norm(h, 0.0);
  EXPECT_EQ(h[0](0, 0), 30.0);
}

TEST(Evaluate, ImmediateEndModelScoresOneHundredPercent) {
  const data::Dataset ds = tiny_data(5, 4);
  model::Seq2Seq m = testing::uniform_output_model(small_model(), 1);
  std::vector<ad::Matrix> v = m.values();
  v[m.layout().out_b](model::kEosId, 0) = 10.0;
  m.set_values(v);
  const EvalResult r = evaluate(m, ds, 3);
  EXPECT_DOUBLE_EQ(r.cer, 100.0);
  EXPECT_DOUBLE_EQ(r.wer, 100.0);
  for (const auto &u : r.utterances) EXPECT_TRUE(u.hyp_text.empty());
}

TEST(Evaluate, AggregateMatchesPerUtteranceCounts) {
  const data::Dataset ds = tiny_data(8, 4);
  const model::Seq2Seq m = testing::sharp_model(small_model(), 3, 3.0);
  EvalResult r = evaluate(m, ds, 2);
  long e = 0, n = 0;
  for (const auto &u : r.utterances) {
    e += u.char_edits;
    n += u.ref_chars;
    EXPECT_EQ(u.char_edits, text::cer_count(ds.vocab.encode(u.ref_text), u.hyp_tokens));
    EXPECT_EQ(u.hyp_text, ds.vocab.decode(u.hyp_tokens));
    EXPECT_EQ(u.nbest.front().first, u.hyp_text);
    EXPECT_LE(u.nbest.size(), 2u);
  }
  EXPECT_DOUBLE_EQ(r.cer, 100.0 * e / n);
  const double cer = r.cer;
  aggregate(r);
  EXPECT_EQ(r.cer, cer);
}

TEST(Evaluate, AggregateOfEmptyReferences) {
  EvalResult r;
  r.utterances.resize(1);
  aggregate(r);
  EXPECT_EQ(r.cer, 0.0);
  r.utterances[0].char_edits = 2;
  aggregate(r);
  EXPECT_EQ(r.cer, 200.0);
}

TEST(Sweep, SingleCellEqualsEvaluate) {
  const data::Dataset ds = tiny_data(5, 4);
  const model::Seq2Seq m = testing::sharp_model(small_model(), 3, 3.0);
  const SweepResult s = sweep_beam({{4, m}}, ds, {4}, {3});
  const EvalResult e = evaluate(m, ds, 3);
  EXPECT_EQ(s.cer[0][0], e.cer);
  EXPECT_EQ(s.wer[0][0], e.wer);
  EXPECT_THROW(sweep_beam({{4, m}}, ds, {5}, {3}), ConfigError);
}

TEST(Sweep, MatrixShapeFollowsLists) {
  const data::Dataset ds = tiny_data(3, 4);
  const model::Seq2Seq m = testing::sharp_model(small_model(), 3, 3.0);
  const SweepResult s = sweep_beam({{1, m}, {2, m}}, ds, {1, 2}, {1, 2, 3});
  ASSERT_EQ(s.cer.size(), 2u);
  ASSERT_EQ(s.cer[0].size(), 3u);
  EXPECT_EQ(s.cer[0], s.cer[1]);
}

TEST(UtteranceSeed, DistinctAcrossEpochsAndIndices) {
  EXPECT_NE(utterance_seed(1, 1, 0), utterance_seed(1, 2, 0));
  EXPECT_NE(utterance_seed(1, 1, 0), utterance_seed(1, 1, 1));
  EXPECT_NE(utterance_seed(1, 1, 0), utterance_seed(2, 1, 0));
  EXPECT_EQ(utterance_seed(3, 4, 5), utterance_seed(3, 4, 5));
}

}  // namespace
}  // namespace papb::train
