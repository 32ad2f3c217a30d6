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

#include "papb/losses/losses.hpp"

#include <algorithm>

#include "papb/error.hpp"
#include "papb/textmetrics/edit_distance.hpp"

namespace papb::loss {

using model::kEosId;

namespace {

double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require_finished(std::span<const PrefixRecord> nbest, const char *who) {
  if (nbest.empty()) throw ArgumentError(std::string(who) + ": empty N-best list");
  for (const PrefixRecord &r : nbest)
    if (!r.finished || r.tokens.empty())
      throw ArgumentError(std::string(who) + ": N-best entries must be finished");
}

Var full_score(ad::Graph &g, const PrefixRecord &r) {
  return beam::raw_prefix_score_node(g, r, static_cast<int>(r.step_logit_nodes.size()));
}

}  // namespace

Objective parse_objective(const std::string &name) {
  if (name == "CE") return Objective::kCE;
  if (name == "MBR") return Objective::kMBR;
  if (name == "SM") return Objective::kSM;
  if (name == "PAPB") return Objective::kPAPB;
  throw ConfigError("unknown objective '" + name + "' (expected CE, MBR, SM or PAPB)");
}

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::kCE: return "CE";
    case Objective::kMBR: return "MBR";
    case Objective::kSM: return "SM";
    case Objective::kPAPB: return "PAPB";
  }
  return "?";
}

MarginReference parse_margin_reference(const std::string &name) {
  if (name == "pseudo_true") return MarginReference::kPseudoTrue;
  if (name == "ground_truth") return MarginReference::kGroundTruth;
  throw ConfigError("unknown margin reference '" + name +
                    "' (expected pseudo_true or ground_truth)");
}

std::string margin_reference_name(MarginReference r) {
  return r == MarginReference::kPseudoTrue ? "pseudo_true" : "ground_truth";
}

void LossConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("loss.alpha must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("loss.lambda must be >= 0");
  if (!(teacher_forcing_prob >= 0.0 && teacher_forcing_prob <= 1.0))
    throw ConfigError("loss.teacher_forcing_prob must be in [0, 1]");
}

Var ce_loss(model::ForwardPass &fp, const model::EncoderOutput &enc,
            std::span<const int> target, double teacher_forcing_prob,
            std::mt19937_64 &rng) {
  if (target.empty()) throw ArgumentError("ce_loss: empty target");
  if (target.back() != kEosId) throw ArgumentError("ce_loss: target must end with <eos>");
  ad::Graph &g = fp.graph();
  const int V = fp.model().config().vocab_size;
  std::vector<Var> terms;
  terms.reserve(target.size());
  model::DecoderContext ctx = fp.initial_context(enc);
  for (std::size_t l = 0; l < target.size(); ++l) {
    const int tok = target[l];
    if (tok <= model::kSosId || tok >= V)
      throw ArgumentError("ce_loss: target token " + std::to_string(tok) +
                          " is not an emittable id");
    model::StepOutput out = fp.step(ctx, enc);
    terms.push_back(g.pick(out.logp, tok));
    const bool truth = uniform01(rng) < teacher_forcing_prob;
    const int fed = truth ? tok : model::argmax_token(g.value(out.logp));
    ctx = std::move(out.ctx);
    ctx.y_prev = fed;
  }
  return g.scale(g.sum_n(terms), -1.0);
}

std::size_t pseudo_true_index(std::span<const PrefixRecord> nbest, std::span<const int> ref) {
  std::vector<text::NBestEntry> entries;
  entries.reserve(nbest.size());
  for (const PrefixRecord &r : nbest) entries.push_back({beam::strip_eos(r.tokens), r.logp_sum});
  return text::select_pseudo_true(entries, ref);
}

Var mbr_loss(ad::Graph &g, std::span<const PrefixRecord> nbest, std::span<const int> ref) {
  require_finished(nbest, "mbr_loss");
  std::vector<Var> logps;
  Matrix cer(1, static_cast<Eigen::Index>(nbest.size()));
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    logps.push_back(nbest[i].logp_node);
    cer(0, static_cast<Eigen::Index>(i)) =
        text::cer_count(ref, beam::strip_eos(nbest[i].tokens));
  }
  const Var posterior = g.softmax(g.concat_rows(logps));
  return g.matmul(g.constant(std::move(cer)), posterior);
}

Var sm_loss(ad::Graph &g, std::span<const PrefixRecord> nbest, std::span<const int> ref,
            double alpha) {
  require_finished(nbest, "sm_loss");
  const std::size_t best = pseudo_true_index(nbest, ref);
  std::vector<Var> boosted;
  boosted.reserve(nbest.size());
  Var best_score;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    const Var s = full_score(g, nbest[i]);
    if (i == best) best_score = s;
    const int c = text::cer_count(ref, beam::strip_eos(nbest[i].tokens));
    boosted.push_back(g.add_scalar(s, alpha * c));
  }
  return g.sub(g.logsumexp(g.concat_rows(boosted)), best_score);
}

Var papb_loss(ad::Graph &g, const BeamTrace &trace, std::span<const PrefixRecord> nbest,
              std::span<const int> ref, const PapbOptions &opts) {
  if (trace.snapshots.empty()) throw ArgumentError("papb_loss: empty beam trace");
  require_finished(nbest, "papb_loss");
  const PrefixRecord &best = nbest[pseudo_true_index(nbest, ref)];
  const std::vector<int> best_chars = beam::strip_eos(best.tokens);
  const std::span<const int> margin_ref =
      opts.margin_reference == MarginReference::kPseudoTrue ? std::span<const int>(best_chars)
                                                            : ref;
  const int L = static_cast<int>(best.tokens.size());
  const int steps = std::min(L, static_cast<int>(trace.snapshots.size()));
  std::vector<Var> terms;
  for (int l = 1; l <= steps; ++l) {
    const auto &snap = trace.snapshots[static_cast<std::size_t>(l - 1)];
    std::vector<Var> boosted;
    boosted.reserve(snap.size());
    for (const PrefixRecord &y : snap) {
      const int len = static_cast<int>(y.tokens.size());
      if (len < l && !opts.include_finished) continue;
      const Var s = beam::raw_prefix_score_node(g, y, std::min(l, len));
      const int b = text::prefix_cer(margin_ref, beam::strip_eos(y.tokens), l);
      boosted.push_back(g.add_scalar(s, opts.alpha * b));
    }
    if (boosted.empty()) continue;
    const Var own = beam::raw_prefix_score_node(g, best, l);
    terms.push_back(g.sub(g.logsumexp(g.concat_rows(boosted)), own));
  }
  if (terms.empty()) throw ArgumentError("papb_loss: no prefix terms");
  return g.sum_n(terms);
}

Var combined_loss(ad::Graph &g, Var sequence_loss, Var ce, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("combined_loss: lambda must be >= 0");
  return g.add(sequence_loss, g.scale(ce, lambda));
}

Var utterance_objective(model::ForwardPass &fp, const Matrix &feats,
                        std::span<const int> ref, const UtteranceOptions &opts) {
  opts.loss.validate();
  ad::Graph &g = fp.graph();
  const model::EncoderOutput enc = fp.encode(feats);
  std::vector<int> target(ref.begin(), ref.end());
  target.push_back(kEosId);
  std::mt19937_64 rng(opts.seed);
  const LossConfig &lc = opts.loss;
  if (lc.objective == Objective::kCE)
    return ce_loss(fp, enc, target, lc.teacher_forcing_prob, rng);

  const int max_len = opts.max_len > 0 ? opts.max_len : beam::default_max_len(enc.frames);
  const beam::BeamResult br = beam::beam_search(fp, enc, opts.beam_size, max_len);
  Var seq;
  switch (lc.objective) {
    case Objective::kMBR:
      seq = mbr_loss(g, br.nbest, ref);
      break;
    case Objective::kSM:
      seq = sm_loss(g, br.nbest, ref, lc.alpha);
      break;
    case Objective::kPAPB:
      seq = papb_loss(g, br.trace, br.nbest, ref,
                      {lc.alpha, lc.margin_reference, lc.include_finished});
      break;
    case Objective::kCE:
      break;
  }
  if (lc.lambda > 0.0) {
    const Var ce = ce_loss(fp, enc, target, lc.teacher_forcing_prob, rng);
    seq = combined_loss(g, seq, ce, lc.lambda);
  }
  return seq;
}

LossValue utterance_loss(const model::Seq2Seq &model, const Matrix &feats,
                         std::span<const int> ref, const UtteranceOptions &opts) {
  model::ForwardPass fp(model);
  const Var root = utterance_objective(fp, feats, ref, opts);
  fp.graph().backward(root);
  return {fp.graph().scalar(root), fp.gradients()};
}

double utterance_loss_value(const model::Seq2Seq &model, const Matrix &feats,
                            std::span<const int> ref, const UtteranceOptions &opts) {
  model::ForwardPass fp(model);
  return fp.graph().scalar(utterance_objective(fp, feats, ref, opts));
}

}  // namespace papb::loss
