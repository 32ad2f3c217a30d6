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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "papb/beam/beam_search.hpp"
#include "papb/data/dataset.hpp"
#include "papb/losses/losses.hpp"
#include "papb/model/seq2seq.hpp"

namespace papb::train {

using loss::Objective;

struct TrainConfig {
  int epochs = 20;
  int batch_size = 30;
  double lr = 1.0;
  double lr_decay_factor = 0.5;
  /// Dev CER (absolute percent) an epoch must gain over the best so far to
  /// avoid a learning-rate decay.
  double decay_threshold = 0.1;
  /// Consecutive epochs without such a gain before the rate is decayed.
  int decay_patience = 3;
  int n_tr = 10;
  int n_de = 10;
  std::uint64_t seed = 1;
  /// Global-norm clipping threshold; <= 0 disables clipping.
  double grad_clip = 5.0;
  /// Beam width used for the per-epoch dev CER.
  int validation_beam = 1;
  /// Decoding cap during training; 0 selects beam::default_max_len.
  int max_len = 0;
  /// When false, wall_seconds is reported as 0 so metrics files are
  /// reproducible byte for byte.
  bool record_wall_time = true;

  /// Epochs, batch size and learning rate used for each training phase.
  static TrainConfig defaults_for(Objective objective);
  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_cer = 0.0;
  double dev_wer = 0.0;
  double lr_used = 0.0;
  double wall_seconds = 0.0;
};

struct UtteranceResult {
  std::string id;
  std::string ref_text;
  std::string hyp_text;
  std::vector<int> hyp_tokens;
  int char_edits = 0;
  int ref_chars = 0;
  int word_edits = 0;
  int ref_words = 0;
  double logp_sum = 0.0;
  std::vector<std::pair<std::string, double>> nbest;
};

struct EvalResult {
  double cer = 0.0;  // percent
  double wer = 0.0;  // percent
  std::vector<UtteranceResult> utterances;
};

/// Aggregate CER/WER (percent) from per-utterance edit counts: total edits
/// over total reference length.
void aggregate(EvalResult &result);

UtteranceResult decode_utterance(const model::Seq2Seq &model, const data::Utterance &utt,
                                 const data::Vocab &vocab, int beam_size, int max_len = 0);

EvalResult evaluate(const model::Seq2Seq &model, const data::Dataset &dataset, int beam_size);

struct TrainResult {
  model::Seq2Seq best;  // lowest dev CER among the epoch checkpoints
  model::Seq2Seq last;
  int best_epoch = 0;
  std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics &)>;

/// Mini-batch AdaDelta training with validation-driven learning-rate decay.
/// Sequence objectives require `init` (a CE-trained model).
TrainResult train(const model::ModelConfig &model_config, const TrainConfig &config,
                  const loss::LossConfig &loss_config, const data::Dataset &train_set,
                  const data::Dataset &dev_set, const model::Seq2Seq *init,
                  const EpochCallback &on_epoch = {});

/// Sum of per-utterance gradients in the given order, divided by the count.
loss::LossValue batch_gradient(const model::Seq2Seq &model, const data::Dataset &dataset,
                               std::span<const std::size_t> order,
                               const loss::UtteranceOptions &base, std::uint64_t seed,
                               int epoch);

/// Rescales grads in place when their global L2 norm exceeds max_norm;
/// returns the norm before clipping.
double clip_global_norm(std::vector<ad::Matrix> &grads, double max_norm);

/// Seed of the scheduled-sampling generator for one utterance.
std::uint64_t utterance_seed(std::uint64_t seed, int epoch, std::size_t index);

struct SweepResult {
  std::vector<int> n_tr, n_de;
  std::vector<std::vector<double>> wer;  // rows follow n_tr, columns n_de
  std::vector<std::vector<double>> cer;
};

/// Evaluates every (N_tr, N_de) pair; `checkpoints` maps N_tr to the model
/// trained with that beam width.
SweepResult sweep_beam(const std::map<int, model::Seq2Seq> &checkpoints,
                                            const data::Dataset &dataset,
                                            const std::vector<int> &n_tr_list,
                                            const std::vector<int> &n_de_list);

}  // namespace papb::train
