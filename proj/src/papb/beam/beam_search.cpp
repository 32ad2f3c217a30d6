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

#include "papb/beam/beam_search.hpp"

#include <algorithm>

#include "papb/error.hpp"

namespace papb::beam {

using model::kEosId;
using model::kSosId;

namespace {

struct Candidate {
  double score;
  int token;
  int parent;
  bool carried;  // finished record passed through unchanged
};

PrefixRecord extend(ad::Graph &g, const PrefixRecord &parent,
                    const model::StepOutput &out, int token) {
  PrefixRecord rec = parent;
  const Var lp = g.pick(out.logp, token);
  const Var logit = g.pick(out.logits, token);
  rec.tokens.push_back(token);
  rec.logp_sum = parent.logp_sum + g.scalar(lp);
  rec.logp_node = parent.logp_node.valid() ? g.add(parent.logp_node, lp) : lp;
  const double s = g.scalar(logit);
  rec.step_logits.push_back(s);
  rec.logit_sum = parent.logit_sum + s;
  rec.step_logit_nodes.push_back(logit);
  rec.ctx = out.ctx;
  rec.ctx.y_prev = token;
  rec.finished = token == kEosId;
  return rec;
}

}  // namespace

int default_max_len(int frames) { return std::min(200, std::max(1, 2 * frames)); }

std::vector<PrefixRecord> beam_step(model::ForwardPass &fp,
                                    const std::vector<PrefixRecord> &beam,
                                    const model::EncoderOutput &enc, int beam_size) {
  if (beam_size < 1) throw ArgumentError("beam_step: beam size must be >= 1");
  if (beam.empty()) throw ArgumentError("beam_step: empty beam");
  ad::Graph &g = fp.graph();
  const int V = fp.model().config().vocab_size;
  std::vector<model::StepOutput> outs(beam.size());
  std::vector<Candidate> cands;
  cands.reserve(beam.size() * static_cast<std::size_t>(V));
  for (std::size_t i = 0; i < beam.size(); ++i) {
    const PrefixRecord &rec = beam[i];
    if (rec.finished) {
      cands.push_back({rec.logp_sum, rec.tokens.back(), static_cast<int>(i), true});
      continue;
    }
    outs[i] = fp.step(rec.ctx, enc);
    const ad::Matrix &logp = g.value(outs[i].logp);
    for (int k = kSosId + 1; k < V; ++k)
      cands.push_back({rec.logp_sum + logp(k, 0), k, static_cast<int>(i), false});
  }
  const std::size_t keep = std::min(cands.size(), static_cast<std::size_t>(beam_size));
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep),
                    cands.end(), [](const Candidate &a, const Candidate &b) {
                      if (a.score != b.score) return a.score > b.score;
                      if (a.token != b.token) return a.token < b.token;
                      return a.parent < b.parent;
                    });
  std::vector<PrefixRecord> next;
  next.reserve(keep);
  for (std::size_t c = 0; c < keep; ++c) {
    const Candidate &cand = cands[c];
    if (cand.carried)
      next.push_back(beam[cand.parent]);
    else
      next.push_back(extend(g, beam[cand.parent], outs[cand.parent], cand.token));
  }
  return next;
}

BeamResult beam_search(model::ForwardPass &fp, const model::EncoderOutput &enc,
                       int beam_size, int max_len) {
  if (max_len < 1) throw ArgumentError("beam_search: max_len must be >= 1");
  if (beam_size < 1) throw ArgumentError("beam_search: beam size must be >= 1");
  BeamResult res;
  PrefixRecord root;
  root.ctx = fp.initial_context(enc);
  std::vector<PrefixRecord> beam{root};
  for (int l = 1; l <= max_len; ++l) {
    beam = beam_step(fp, beam, enc, beam_size);
    res.trace.snapshots.push_back(beam);
    if (std::all_of(beam.begin(), beam.end(),
                    [](const PrefixRecord &r) { return r.finished; }))
      break;
  }
  bool forced = false;
  for (PrefixRecord &rec : beam) {
    if (rec.finished) continue;
    const model::StepOutput out = fp.step(rec.ctx, enc);
    rec = extend(fp.graph(), rec, out, kEosId);
    forced = true;
  }
  if (forced) res.trace.snapshots.push_back(beam);
  res.nbest = std::move(beam);
  std::stable_sort(res.nbest.begin(), res.nbest.end(),
                   [](const PrefixRecord &a, const PrefixRecord &b) {
                     return a.logp_sum > b.logp_sum;
                   });
  return res;
}

double raw_prefix_score(const PrefixRecord &rec, int l) {
  if (l < 0 || l > static_cast<int>(rec.step_logits.size()))
    throw ArgumentError("raw_prefix_score: prefix length out of range");
  double s = 0.0;
  for (int i = 0; i < l; ++i) s += rec.step_logits[i];
  return s;
}

Var raw_prefix_score_node(ad::Graph &g, const PrefixRecord &rec, int l) {
  if (l < 0 || l > static_cast<int>(rec.step_logit_nodes.size()))
    throw ArgumentError("raw_prefix_score: prefix length out of range");
  if (l == 0) return g.scalar_constant(0.0);
  return g.sum_n(std::span<const Var>(rec.step_logit_nodes.data(),
                                      static_cast<std::size_t>(l)));
}

std::vector<int> strip_eos(const std::vector<int> &tokens) {
  std::vector<int> out = tokens;
  if (!out.empty() && out.back() == kEosId) out.pop_back();
  return out;
}

}  // namespace papb::beam
