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

#include "papb/model/seq2seq.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "papb/error.hpp"

namespace papb::model {

void ModelConfig::validate() const {
  auto positive = [](int v, const char *name) {
    if (v < 1) throw ConfigError(std::string("model.") + name + " must be >= 1");
  };
  positive(input_dim, "input_dim");
  positive(encoder_layers, "encoder_layers");
  positive(encoder_units, "encoder_units");
  positive(decoder_layers, "decoder_layers");
  positive(decoder_units, "decoder_units");
  positive(attention_dim, "attention_dim");
  positive(conv_channels, "conv_channels");
  positive(conv_kernel, "conv_kernel");
  if (vocab_size < 3)
    throw ConfigError("model.vocab_size must cover <sos>, <eos> and one more symbol");
  if (!symbols.empty() && static_cast<int>(symbols.size()) != vocab_size)
    throw ConfigError("model.symbols size differs from vocab_size");
  if (!(init_range > 0.0)) throw ConfigError("model.init_range must be positive");
}

Seq2Seq::Seq2Seq(ModelConfig config, std::vector<NamedParam> params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  build_layout();
}

void Seq2Seq::build_layout() {
  layout_ = Layout{};
  auto find = [this](const std::string &name) {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name == name) return static_cast<int>(i);
    throw DataError("model: missing parameter block " + name);
  };
  const ModelConfig &c = config_;
  const int He = c.encoder_units, Hd = c.decoder_units;
  auto expect = [this](int idx, Eigen::Index r, Eigen::Index cols) {
    const Matrix &m = params_[idx].value;
    if (m.rows() != r || m.cols() != cols)
      throw DataError("model: parameter block " + params_[idx].name +
                      " has shape " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected " + std::to_string(r) +
                      "x" + std::to_string(cols));
  };
  for (int l = 0; l < c.encoder_layers; ++l) {
    const int in = l == 0 ? c.input_dim : 2 * He;
    for (int dir = 0; dir < 2; ++dir) {
      const std::string pfx = "enc.l" + std::to_string(l) + (dir == 0 ? ".fw." : ".bw.");
      Layout::Lstm s{find(pfx + "W"), find(pfx + "U"), find(pfx + "b")};
      expect(s.W, 4 * He, in);
      expect(s.U, 4 * He, He);
      expect(s.b, 4 * He, 1);
      (dir == 0 ? layout_.enc_fw : layout_.enc_bw).push_back(s);
    }
  }
  layout_.att_Wq = find("att.Wq");
  layout_.att_Wh = find("att.Wh");
  layout_.att_conv = find("att.conv");
  layout_.att_Wf = find("att.Wf");
  layout_.att_b = find("att.b");
  layout_.att_w = find("att.w");
  expect(layout_.att_Wq, c.attention_dim, Hd);
  expect(layout_.att_Wh, c.attention_dim, 2 * He);
  expect(layout_.att_conv, c.conv_channels, c.conv_kernel);
  expect(layout_.att_Wf, c.attention_dim, c.conv_channels);
  expect(layout_.att_b, c.attention_dim, 1);
  expect(layout_.att_w, 1, c.attention_dim);
  layout_.dec_Wr = find("dec.l0.Wr");
  layout_.dec_E = find("dec.l0.E");
  expect(layout_.dec_Wr, 4 * Hd, 2 * He);
  expect(layout_.dec_E, 4 * Hd, c.vocab_size);
  for (int l = 0; l < c.decoder_layers; ++l) {
    const std::string pfx = "dec.l" + std::to_string(l) + ".";
    Layout::Lstm s{l == 0 ? -1 : find(pfx + "W"), find(pfx + "U"), find(pfx + "b")};
    if (l > 0) expect(s.W, 4 * Hd, Hd);
    expect(s.U, 4 * Hd, Hd);
    expect(s.b, 4 * Hd, 1);
    layout_.dec.push_back(s);
  }
  layout_.out_W = find("out.W");
  layout_.out_b = find("out.b");
  expect(layout_.out_W, c.vocab_size, Hd);
  expect(layout_.out_b, c.vocab_size, 1);
}

Seq2Seq Seq2Seq::initialize(const ModelConfig &config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const double r = config.init_range;
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    // Row-major fill so the draw order does not depend on storage order.
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        m(i, j) = (2.0 * u - 1.0) * r;
      }
    return m;
  };
  auto lstm_bias = [&](int units) {
    Matrix b = uniform(4 * units, 1);
    b.middleRows(units, units).setConstant(config.forget_bias);
    return b;
  };
  std::vector<NamedParam> ps;
  const int He = config.encoder_units, Hd = config.decoder_units;
  for (int l = 0; l < config.encoder_layers; ++l) {
    const int in = l == 0 ? config.input_dim : 2 * He;
    for (const char *dir : {".fw.", ".bw."}) {
      const std::string pfx = "enc.l" + std::to_string(l) + dir;
      ps.push_back({pfx + "W", uniform(4 * He, in)});
      ps.push_back({pfx + "U", uniform(4 * He, He)});
      ps.push_back({pfx + "b", lstm_bias(He)});
    }
  }
  const int A = config.attention_dim;
  ps.push_back({"att.Wq", uniform(A, Hd)});
  ps.push_back({"att.Wh", uniform(A, 2 * He)});
  ps.push_back({"att.conv", uniform(config.conv_channels, config.conv_kernel)});
  ps.push_back({"att.Wf", uniform(A, config.conv_channels)});
  ps.push_back({"att.b", uniform(A, 1)});
  ps.push_back({"att.w", uniform(1, A)});
  for (int l = 0; l < config.decoder_layers; ++l) {
    const std::string pfx = "dec.l" + std::to_string(l) + ".";
    if (l == 0) {
      ps.push_back({pfx + "Wr", uniform(4 * Hd, 2 * He)});
      ps.push_back({pfx + "E", uniform(4 * Hd, config.vocab_size)});
    } else {
      ps.push_back({pfx + "W", uniform(4 * Hd, Hd)});
    }
    ps.push_back({pfx + "U", uniform(4 * Hd, Hd)});
    ps.push_back({pfx + "b", lstm_bias(Hd)});
  }
  ps.push_back({"out.W", uniform(config.vocab_size, Hd)});
  ps.push_back({"out.b", uniform(config.vocab_size, 1)});
  return Seq2Seq(config, std::move(ps));
}

std::vector<Matrix> Seq2Seq::values() const {
  std::vector<Matrix> v;
  v.reserve(params_.size());
  for (const auto &p : params_) v.push_back(p.value);
  return v;
}

void Seq2Seq::set_values(const std::vector<Matrix> &values) {
  if (values.size() != params_.size())
    throw ArgumentError("model: parameter block count differs");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i].value.rows() ||
        values[i].cols() != params_[i].value.cols())
      throw ArgumentError("model: shape mismatch for " + params_[i].name);
    params_[i].value = values[i];
  }
}

std::size_t Seq2Seq::num_params() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::vector<double> Seq2Seq::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  for (const auto &p : params_)
    flat.insert(flat.end(), p.value.data(), p.value.data() + p.value.size());
  return flat;
}

void Seq2Seq::unflatten(std::span<const double> flat) {
  if (flat.size() != num_params()) throw ArgumentError("model: flat size differs");
  std::size_t off = 0;
  for (auto &p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), p.value.size(),
                p.value.data());
    off += static_cast<std::size_t>(p.value.size());
  }
}

ForwardPass::ForwardPass(const Seq2Seq &model) : model_(&model) {
  p_.reserve(model.params().size());
  for (const auto &np : model.params()) p_.push_back(graph_.param(np.value));
}

ForwardPass::LstmOut ForwardPass::lstm(Var gates, Var c_prev, int units) {
  ad::Graph &g = graph_;
  const Var sig = g.sigmoid(gates);
  const Var i = g.rows(sig, 0, units);
  const Var f = g.rows(sig, units, units);
  const Var o = g.rows(sig, 3 * units, units);
  const Var cand = g.tanh(g.rows(gates, 2 * units, units));
  const Var c = g.add(g.mul(f, c_prev), g.mul(i, cand));
  const Var h = g.mul(o, g.tanh(c));
  return {h, c};
}

EncoderOutput ForwardPass::encode(const Matrix &feats) {
  const ModelConfig &cfg = model_->config();
  const auto T = static_cast<int>(feats.rows());
  if (T < 1) throw ArgumentError("encode: input has no frames");
  if (feats.cols() != cfg.input_dim)
    throw ArgumentError("encode: feature dim " + std::to_string(feats.cols()) +
                        " differs from model input_dim " +
                        std::to_string(cfg.input_dim));
  ad::Graph &g = graph_;
  const auto &lay = model_->layout();
  const int He = cfg.encoder_units;
  Var input = g.constant(feats.transpose());
  const Var zero = g.constant(Matrix::Zero(He, 1));
  for (int l = 0; l < cfg.encoder_layers; ++l) {
    Var dir_out[2];
    for (int dir = 0; dir < 2; ++dir) {
      const auto &w = dir == 0 ? lay.enc_fw[l] : lay.enc_bw[l];
      const Var proj = g.add_col(g.matmul(p_[w.W], input), p_[w.b]);
      std::vector<Var> hs(T);
      Var h = zero, c = zero;
      for (int k = 0; k < T; ++k) {
        const int t = dir == 0 ? k : T - 1 - k;
        const Var gates = g.add(g.col(proj, t), g.matmul(p_[w.U], h));
        const LstmOut s = lstm(gates, c, He);
        h = s.h;
        c = s.c;
        hs[t] = h;
      }
      dir_out[dir] = g.concat_cols(hs);
    }
    input = g.concat_rows(dir_out);
  }
  EncoderOutput out;
  out.H = input;
  out.keys = g.add_col(g.matmul(p_[lay.att_Wh], input), p_[lay.att_b]);
  out.frames = T;
  return out;
}

DecoderContext ForwardPass::initial_context(const EncoderOutput &enc) {
  const ModelConfig &cfg = model_->config();
  DecoderContext ctx;
  const Var zero = graph_.constant(Matrix::Zero(cfg.decoder_units, 1));
  ctx.h.assign(cfg.decoder_layers, zero);
  ctx.c.assign(cfg.decoder_layers, zero);
  ctx.a_prev = graph_.constant(Matrix::Constant(enc.frames, 1, 1.0 / enc.frames));
  ctx.y_prev = kSosId;
  return ctx;
}

Attention ForwardPass::attend(const DecoderContext &ctx, const EncoderOutput &enc) {
  ad::Graph &g = graph_;
  const auto &lay = model_->layout();
  if (g.value(ctx.a_prev).rows() != enc.frames || g.value(ctx.a_prev).cols() != 1)
    throw ArgumentError("attend: previous attention length differs from frame count");
  const Var loc = g.conv1d(ctx.a_prev, p_[lay.att_conv]);
  Var pre = g.add(enc.keys, g.matmul(p_[lay.att_Wf], loc));
  pre = g.add_col(pre, g.matmul(p_[lay.att_Wq], ctx.h.back()));
  const Var energy = g.matmul(p_[lay.att_w], g.tanh(pre));
  const Var a = g.transpose(g.softmax(energy));
  return {a, g.matmul(enc.H, a)};
}

StepOutput ForwardPass::decode_step(Var summary, const DecoderContext &ctx,
                                    Var weights) {
  const ModelConfig &cfg = model_->config();
  if (ctx.y_prev < 0 || ctx.y_prev >= cfg.vocab_size)
    throw ArgumentError("decode_step: token id " + std::to_string(ctx.y_prev) +
                        " outside vocabulary");
  ad::Graph &g = graph_;
  const auto &lay = model_->layout();
  const int Hd = cfg.decoder_units;
  StepOutput out;
  out.ctx = ctx;
  out.ctx.a_prev = weights;
  Var below;
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    const auto &w = lay.dec[l];
    Var gates;
    if (l == 0) {
      const Var terms[] = {g.matmul(p_[lay.dec_Wr], summary), g.col(p_[lay.dec_E], ctx.y_prev),
                           g.matmul(p_[w.U], ctx.h[l]), p_[w.b]};
      gates = g.sum_n(terms);
    } else {
      const Var terms[] = {g.matmul(p_[w.W], below), g.matmul(p_[w.U], ctx.h[l]), p_[w.b]};
      gates = g.sum_n(terms);
    }
    const LstmOut s = lstm(gates, ctx.c[l], Hd);
    out.ctx.h[l] = s.h;
    out.ctx.c[l] = s.c;
    below = s.h;
  }
  out.logits = g.add(g.matmul(p_[lay.out_W], below), p_[lay.out_b]);
  out.logp = g.log_softmax(out.logits, kSosId + 1);
  return out;
}

StepOutput ForwardPass::step(const DecoderContext &ctx, const EncoderOutput &enc) {
  const Attention att = attend(ctx, enc);
  return decode_step(att.summary, ctx, att.weights);
}

Var ForwardPass::sequence_log_prob(const EncoderOutput &enc, std::span<const int> y) {
  const int V = model_->config().vocab_size;
  if (y.empty()) throw ArgumentError("sequence_log_prob: empty sequence");
  if (y.back() != kEosId)
    throw ArgumentError("sequence_log_prob: sequence must end with <eos>");
  std::vector<Var> terms;
  terms.reserve(y.size());
  DecoderContext ctx = initial_context(enc);
  for (std::size_t l = 0; l < y.size(); ++l) {
    const int tok = y[l];
    if (tok <= kSosId || tok >= V)
      throw ArgumentError("sequence_log_prob: token " + std::to_string(tok) +
                          " is not an emittable id");
    if (tok == kEosId && l + 1 != y.size())
      throw ArgumentError("sequence_log_prob: <eos> before the end of the sequence");
    StepOutput s = step(ctx, enc);
    terms.push_back(graph_.pick(s.logp, tok));
    ctx = std::move(s.ctx);
    ctx.y_prev = tok;
  }
  return graph_.sum_n(terms);
}

std::vector<Matrix> ForwardPass::gradients() const {
  std::vector<Matrix> out;
  out.reserve(p_.size());
  for (Var v : p_) out.push_back(graph_.grad(v));
  return out;
}

int argmax_token(const Matrix &logp) {
  int best = kSosId + 1;
  for (int k = best + 1; k < logp.rows(); ++k)
    if (logp(k, 0) > logp(best, 0)) best = k;
  return best;
}

double sequence_log_prob(const Seq2Seq &model, const Matrix &feats,
                         std::span<const int> y) {
  ForwardPass fp(model);
  const EncoderOutput enc = fp.encode(feats);
  return fp.graph().scalar(fp.sequence_log_prob(enc, y));
}

}  // namespace papb::model
