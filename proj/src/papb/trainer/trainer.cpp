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

#include "papb/trainer/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "papb/autodiff/adadelta.hpp"
#include "papb/error.hpp"
#include "papb/textmetrics/edit_distance.hpp"

namespace papb::train {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void shuffle(std::vector<std::size_t> &v, std::mt19937_64 &rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

TrainConfig TrainConfig::defaults_for(Objective objective) {
  TrainConfig c;
  if (objective == Objective::kCE) {
    c.epochs = 20;
    c.batch_size = 30;
    c.lr = 1.0;
  } else {
    c.epochs = 10;
    c.batch_size = 10;
    c.lr = 0.01;
  }
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0))
    throw ConfigError("train.lr_decay_factor must be in (0, 1)");
  if (n_tr < 1 || n_de < 1) throw ConfigError("train.n_tr and train.n_de must be >= 1");
  if (decay_patience < 1) throw ConfigError("train.decay_patience must be >= 1");
  if (validation_beam < 1) throw ConfigError("train.validation_beam must be >= 1");
  if (max_len < 0) throw ConfigError("train.max_len must be >= 0");
}

std::uint64_t utterance_seed(std::uint64_t seed, int epoch, std::size_t index) {
  return splitmix(splitmix(seed ^ 0x5eedULL) + static_cast<std::uint64_t>(epoch) * 0x10001ULL +
                  static_cast<std::uint64_t>(index));
}

void aggregate(EvalResult &r) {
  long edits = 0, chars = 0, wedits = 0, words = 0;
  for (const auto &u : r.utterances) {
    edits += u.char_edits;
    chars += u.ref_chars;
    wedits += u.word_edits;
    words += u.ref_words;
  }
  auto pct = [](long e, long n) {
    if (n == 0) return e == 0 ? 0.0 : 100.0 * static_cast<double>(e);
    return 100.0 * static_cast<double>(e) / static_cast<double>(n);
  };
  r.cer = pct(edits, chars);
  r.wer = pct(wedits, words);
}

UtteranceResult decode_utterance(const model::Seq2Seq &model, const data::Utterance &utt,
                                 const data::Vocab &vocab, int beam_size, int max_len) {
  model::ForwardPass fp(model);
  const model::EncoderOutput enc = fp.encode(utt.feats);
  const int cap = max_len > 0 ? max_len : beam::default_max_len(enc.frames);
  const beam::BeamResult br = beam::beam_search(fp, enc, beam_size, cap);
  UtteranceResult r;
  r.id = utt.id;
  r.ref_text = utt.text;
  r.hyp_tokens = beam::strip_eos(br.nbest.front().tokens);
  r.hyp_text = vocab.decode(r.hyp_tokens);
  r.logp_sum = br.nbest.front().logp_sum;
  for (const auto &rec : br.nbest)
    r.nbest.emplace_back(vocab.decode(beam::strip_eos(rec.tokens)), rec.logp_sum);
  r.char_edits = text::cer_count(utt.target, r.hyp_tokens);
  r.ref_chars = static_cast<int>(utt.target.size());
  r.word_edits = text::word_edits(utt.text, r.hyp_text).total;
  r.ref_words = static_cast<int>(text::split_words(utt.text).size());
  return r;
}

EvalResult evaluate(const model::Seq2Seq &model, const data::Dataset &dataset, int beam_size) {
  EvalResult res;
  res.utterances.reserve(dataset.utterances.size());
  for (const auto &u : dataset.utterances)
    res.utterances.push_back(decode_utterance(model, u, dataset.vocab, beam_size));
  aggregate(res);
  return res;
}

double clip_global_norm(std::vector<ad::Matrix> &grads, double max_norm) {
  double sq = 0.0;
  for (const auto &g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto &g : grads) g *= s;
  }
  return norm;
}

loss::LossValue batch_gradient(const model::Seq2Seq &model, const data::Dataset &dataset,
                               std::span<const std::size_t> order,
                               const loss::UtteranceOptions &base, std::uint64_t seed,
                               int epoch) {
  if (order.empty()) throw ArgumentError("batch_gradient: empty batch");
  loss::LossValue total;
  for (std::size_t idx : order) {
    const data::Utterance &u = dataset.utterances.at(idx);
    loss::UtteranceOptions opts = base;
    opts.seed = utterance_seed(seed, epoch, idx);
    loss::LossValue lv = loss::utterance_loss(model, u.feats, u.target, opts);
    if (!std::isfinite(lv.value))
      throw NumericError("non-finite loss for utterance " + u.id);
    total.value += lv.value;
    if (total.grads.empty()) {
      total.grads = std::move(lv.grads);
    } else {
      for (std::size_t i = 0; i < total.grads.size(); ++i) total.grads[i] += lv.grads[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(order.size());
  total.value *= inv;
  for (auto &g : total.grads) g *= inv;
  return total;
}

TrainResult train(const model::ModelConfig &model_config, const TrainConfig &config,
                  const loss::LossConfig &loss_config, const data::Dataset &train_set,
                  const data::Dataset &dev_set, const model::Seq2Seq *init,
                  const EpochCallback &on_epoch) {
  config.validate();
  loss_config.validate();
  if (train_set.utterances.empty()) throw ConfigError("training set is empty");
  if (dev_set.utterances.empty()) throw ConfigError("dev set is empty");
  if (loss_config.objective != Objective::kCE && init == nullptr)
    throw ConfigError("objective " + loss::objective_name(loss_config.objective) +
                      " requires a CE-trained initial checkpoint (warm start)");

  model::Seq2Seq current;
  if (init) {
    current = *init;
  } else {
    model::ModelConfig mc = model_config;
    mc.input_dim = train_set.feat_dim;
    mc.vocab_size = train_set.vocab.size();
    mc.symbols = train_set.vocab.symbols();
    current = model::Seq2Seq::initialize(mc, splitmix(config.seed));
  }
  if (current.config().input_dim != train_set.feat_dim)
    throw ConfigError("model input_dim differs from the training feature dim");
  if (current.config().vocab_size != train_set.vocab.size())
    throw ConfigError("model vocab_size differs from the training vocabulary");

  std::vector<ad::Matrix> params = current.values();
  ad::AdaDeltaState state = ad::AdaDeltaState::zeros_like(params);
  std::mt19937_64 order_rng(splitmix(config.seed + 1));

  loss::UtteranceOptions base;
  base.loss = loss_config;
  base.beam_size = config.n_tr;
  base.max_len = config.max_len;

  TrainResult result;
  double lr = config.lr;
  double best_cer = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::vector<std::size_t> order(train_set.utterances.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t n =
          std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, n);
      loss::LossValue lv = batch_gradient(current, train_set, batch, base, config.seed, epoch);
      loss_sum += lv.value * static_cast<double>(n);
      clip_global_norm(lv.grads, config.grad_clip);
      ad::adadelta_step(params, lv.grads, state, lr);
      current.set_values(params);
    }
    const EvalResult dev = evaluate(current, dev_set, config.validation_beam);
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.dev_cer = dev.cer;
    m.dev_wer = dev.wer;
    m.lr_used = lr;
    if (config.record_wall_time)
      m.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(m);
    if (dev.cer <= best_cer - config.decay_threshold) {
      stale = 0;
    } else if (++stale >= config.decay_patience) {
      lr *= config.lr_decay_factor;
      stale = 0;
    }
    if (dev.cer < best_cer) {
      best_cer = dev.cer;
      result.best = current;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(m);
  }
  result.last = current;
  return result;
}

SweepResult sweep_beam(const std::map<int, model::Seq2Seq> &checkpoints,
                       const data::Dataset &dataset, const std::vector<int> &n_tr_list,
                       const std::vector<int> &n_de_list) {
  SweepResult res;
  res.n_tr = n_tr_list;
  res.n_de = n_de_list;
  for (int ntr : n_tr_list) {
    auto it = checkpoints.find(ntr);
    if (it == checkpoints.end())
      throw ConfigError("sweep: no checkpoint for N_tr=" + std::to_string(ntr));
    std::vector<double> wrow, crow;
    for (int nde : n_de_list) {
      const EvalResult e = evaluate(it->second, dataset, nde);
      wrow.push_back(e.wer);
      crow.push_back(e.cer);
    }
    res.wer.push_back(std::move(wrow));
    res.cer.push_back(std::move(crow));
  }
  return res;
}

}  // namespace papb::train
