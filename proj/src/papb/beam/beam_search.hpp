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

#include <vector>

#include "papb/model/seq2seq.hpp"

namespace papb::beam {

using ad::Var;
using model::DecoderContext;

/// One beam hypothesis. Scores are kept both as numbers and as graph nodes
/// of the ForwardPass that produced them, so losses can differentiate
/// through them.
struct PrefixRecord {
  std::vector<int> tokens;  // emitted ids, <sos> excluded, <eos> included
  double logp_sum = 0.0;
  double logit_sum = 0.0;
  std::vector<double> step_logits;
  Var logp_node;                   // invalid for the empty root record
  std::vector<Var> step_logit_nodes;
  DecoderContext ctx;
  bool finished = false;
};

/// Post-pruning beam contents after every decoding step. The last snapshot
/// is the final N-best list (after forced termination).
struct BeamTrace {
  std::vector<std::vector<PrefixRecord>> snapshots;
};

struct BeamResult {
  std::vector<PrefixRecord> nbest;  // sorted by logp_sum, descending
  BeamTrace trace;
};

/// Default decoding length cap: twice the frame count, at most 200.
int default_max_len(int frames);

/// Expands every unfinished record over all emittable ids and keeps the N
/// best candidates by logp_sum. Finished records compete for slots with
/// their final scores. Ties go to the smaller token id, then the earlier
/// parent.
std::vector<PrefixRecord> beam_step(model::ForwardPass &fp,
                                    const std::vector<PrefixRecord> &beam,
                                    const model::EncoderOutput &enc, int beam_size);

/// Runs beam_step until every record has finished or max_len steps were
/// taken; survivors are then terminated with an explicit <eos> step.
BeamResult beam_search(model::ForwardPass &fp, const model::EncoderOutput &enc,
                       int beam_size, int max_len);

/// Sum of the first l selected-token logits.
double raw_prefix_score(const PrefixRecord &rec, int l);
Var raw_prefix_score_node(ad::Graph &g, const PrefixRecord &rec, int l);

/// Tokens with the trailing <eos> removed.
std::vector<int> strip_eos(const std::vector<int> &tokens);

}  // namespace papb::beam
