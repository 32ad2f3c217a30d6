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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "papb/beam/beam_search.hpp"
#include "papb/model/seq2seq.hpp"

namespace papb::loss {

using ad::Matrix;
using ad::Var;
using beam::BeamTrace;
using beam::PrefixRecord;

enum class Objective { kCE, kMBR, kSM, kPAPB };

Objective parse_objective(const std::string &name);
std::string objective_name(Objective o);

/// Which sequence the PAPB prefix margin is measured against.
enum class MarginReference { kPseudoTrue, kGroundTruth };

MarginReference parse_margin_reference(const std::string &name);
std::string margin_reference_name(MarginReference r);

struct LossConfig {
  Objective objective = Objective::kCE;
  double alpha = 1.0;
  double lambda = 0.001;
  double teacher_forcing_prob = 1.0;
  MarginReference margin_reference = MarginReference::kPseudoTrue;
  /// Whether hypotheses that already emitted <eos> keep contributing to
  /// later prefix terms (with their final score).
  bool include_finished = true;

  void validate() const;
};

struct LossValue {
  double value = 0.0;
  std::vector<Matrix> grads;  // one per model parameter block
};

/// -sum_l log p(y*_l | feedback). Feedback at each step after the first is
/// the reference token with probability teacher_forcing_prob, otherwise the
/// model's own argmax from the previous step. `target` ends with <eos>.
Var ce_loss(model::ForwardPass &fp, const model::EncoderOutput &enc,
            std::span<const int> target, double teacher_forcing_prob,
            std::mt19937_64 &rng);

/// Expected edit distance under the N-best posterior renormalized from
/// logp_sum. `ref` holds the reference characters without <eos>.
Var mbr_loss(ad::Graph &g, std::span<const PrefixRecord> nbest, std::span<const int> ref);

/// Softmax margin over whole hypotheses, with the lowest-error N-best
/// member standing in for the reference.
Var sm_loss(ad::Graph &g, std::span<const PrefixRecord> nbest, std::span<const int> ref,
            double alpha);

struct PapbOptions {
  double alpha = 1.0;
  MarginReference margin_reference = MarginReference::kPseudoTrue;
  bool include_finished = true;
};

/// Softmax margin applied to every prefix length l = 1..|pseudo-true| over
/// the beam snapshot of step l. Prefix margins compare equal-length
/// prefixes.
Var papb_loss(ad::Graph &g, const BeamTrace &trace, std::span<const PrefixRecord> nbest,
              std::span<const int> ref, const PapbOptions &opts);

Var combined_loss(ad::Graph &g, Var sequence_loss, Var ce, double lambda);

/// select_pseudo_true over the records, comparing characters without <eos>.
std::size_t pseudo_true_index(std::span<const PrefixRecord> nbest, std::span<const int> ref);

struct UtteranceOptions {
  LossConfig loss;
  int beam_size = 10;
  int max_len = 0;  // 0 selects beam::default_max_len
  std::uint64_t seed = 0;
};

/// Builds the configured objective for one utterance (CE, or a beam
/// objective plus lambda * CE) inside `fp` and returns the scalar node.
Var utterance_objective(model::ForwardPass &fp, const Matrix &feats,
                        std::span<const int> ref, const UtteranceOptions &opts);

LossValue utterance_loss(const model::Seq2Seq &model, const Matrix &feats,
                         std::span<const int> ref, const UtteranceOptions &opts);

double utterance_loss_value(const model::Seq2Seq &model, const Matrix &feats,
                            std::span<const int> ref, const UtteranceOptions &opts);

}  // namespace papb::loss
