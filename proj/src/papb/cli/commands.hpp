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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "papb/cli/run_config.hpp"
#include "papb/trainer/trainer.hpp"

namespace papb::cli {

inline constexpr const char *kMetricsHeader =
    "epoch,train_loss,dev_cer,dev_wer,lr_used,wall_seconds";

/// One metrics CSV row without the trailing newline.
std::string format_metrics_row(const train::EpochMetrics &m);

struct TrainOutcome {
  int epochs = 0;
  int best_epoch = 0;
  double best_dev_cer = 0.0;
  std::vector<train::EpochMetrics> metrics;
};

/// Trains per `config` and writes effective_config.json, metrics.csv,
/// best.ckpt and last.ckpt into config.output_dir. `init_path` overrides
/// the config's train.init when non-empty.
TrainOutcome run_train(RunConfig config, const std::string &init_path = {},
                       const train::EpochCallback &on_epoch = {});

/// Loads a dataset, taking the symbol table from `vocab_path` or, when that
/// is empty, from the model's checkpoint.
data::Dataset load_dataset_for(const std::string &jsonl_path, const std::string &vocab_path,
                               const model::Seq2Seq *model);

/// Writes one decode record per utterance: id, top text, logp_sum and the
/// N-best list. Returns the number of records.
std::size_t run_decode(const model::Seq2Seq &model, const data::Dataset &dataset,
                       int beam_size, const std::string &out_path);

struct ScoreOutcome {
  double cer = 0.0;  // percent
  double wer = 0.0;  // percent
  std::size_t scored = 0;
  std::size_t unscored_refs = 0;
};

/// Scores decode records against reference records by id. A hypothesis id
/// without a reference is a configuration error. The per-utterance
/// breakdown goes to `breakdown_path` when non-empty.
ScoreOutcome run_score(const std::string &ref_path, const std::string &hyp_path,
                       const std::string &breakdown_path);

struct GradcheckOutcome {
  double max_rel_error = 0.0;
  std::size_t num_params = 0;
  std::size_t num_utterances = 0;
  std::string worst_block;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  bool passed = false;
};

inline constexpr std::size_t kGradcheckMaxParams = 2000;
inline constexpr double kGradcheckTolerance = 1e-4;
/// Relative-error denominator floor. Central-difference roundoff at the
/// default step is ~1e-11, so coordinates whose true gradient is zero would
/// otherwise report unit error.
inline constexpr double kGradcheckFloor = 1e-6;

/// The micro corpus used when the config names no data.
SynthSpec gradcheck_micro_data(int feat_dim, std::uint64_t seed);

/// Finite-difference check of the batch-mean loss of `objective` on a
/// seeded micro-model. `corrupt` doubles the analytic gradient (negative
/// control).
GradcheckOutcome run_gradcheck(RunConfig config, loss::Objective objective, double eps,
                               std::optional<double> lambda, bool corrupt);

/// Trains (or reuses) one model per N_tr under output_dir/sweep_ntr<N>,
/// evaluates each against every N_de on the dev set and writes sweep.csv.
train::SweepResult run_sweep(const RunConfig &config, const std::string &init_path,
                             const std::vector<int> &n_tr_list,
                             const std::vector<int> &n_de_list);

/// Generates a synthetic corpus and writes train.jsonl, dev.jsonl and
/// vocab.txt into out_dir.
void run_synth(const SynthSpec &spec, const std::string &out_dir);

}  // namespace papb::cli
