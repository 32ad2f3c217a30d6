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
#include <span>
#include <string>
#include <vector>

#include "papb/autodiff/graph.hpp"

namespace papb::model {

using ad::Matrix;
using ad::Var;

inline constexpr int kSosId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kUnkId = 2;

struct ModelConfig {
  int input_dim = 8;
  /// Output dimension; covers every id including the reserved ones.
  int vocab_size = 0;
  int encoder_layers = 2;
  int encoder_units = 32;
  int decoder_layers = 1;
  int decoder_units = 32;
  int attention_dim = 32;
  int conv_channels = 10;
  int conv_kernel = 11;
  double init_range = 0.1;
  double forget_bias = 1.0;
  /// Symbol table in id order; optional, kept so checkpoints can be decoded
  /// without the original vocabulary file.
  std::vector<std::string> symbols;

  void validate() const;
};

struct NamedParam {
  std::string name;
  Matrix value;
};

/// Parameters of the attention encoder-decoder, stored as named blocks in
/// declaration order.
class Seq2Seq {
 public:
  Seq2Seq() = default;
  Seq2Seq(ModelConfig config, std::vector<NamedParam> params);

  /// Seeded uniform initialization; LSTM forget-gate biases get forget_bias.
  static Seq2Seq initialize(const ModelConfig &config, std::uint64_t seed);

  const ModelConfig &config() const { return config_; }
  const std::vector<NamedParam> &params() const { return params_; }
  std::vector<Matrix> values() const;
  void set_values(const std::vector<Matrix> &values);
  std::size_t num_params() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  struct Layout {
    struct Lstm {
      int W = -1, U = -1, b = -1;
    };
    std::vector<Lstm> enc_fw, enc_bw;
    int att_Wq = -1, att_Wh = -1, att_conv = -1, att_Wf = -1, att_b = -1, att_w = -1;
    int dec_Wr = -1, dec_E = -1;
    std::vector<Lstm> dec;
    int out_W = -1, out_b = -1;
  };
  const Layout &layout() const { return layout_; }

 private:
  void build_layout();

  ModelConfig config_;
  std::vector<NamedParam> params_;
  Layout layout_;
};

/// Per-frame encoder states plus the frame-side attention projection, which
/// does not depend on the decoder and is computed once per utterance.
struct EncoderOutput {
  Var H;        // 2*encoder_units x T
  Var keys;     // attention_dim x T, W_h H + b
  int frames = 0;
};

/// Recurrent state carried between decoder steps.
struct DecoderContext {
  std::vector<Var> h;  // per decoder layer, decoder_units x 1
  std::vector<Var> c;
  Var a_prev;          // T x 1 attention weights of the previous step
  int y_prev = kSosId;
};

struct Attention {
  Var weights;  // T x 1
  Var summary;  // 2*encoder_units x 1
};

struct StepOutput {
  DecoderContext ctx;  // y_prev still holds the previous token
  Var logits;          // vocab_size x 1
  Var logp;            // vocab_size x 1, -inf at <sos>
};

/// A graph with the model parameters bound as leaves. All forward
/// computations of one loss evaluation share a single ForwardPass.
class ForwardPass {
 public:
  explicit ForwardPass(const Seq2Seq &model);

  ad::Graph &graph() { return graph_; }
  const ad::Graph &graph() const { return graph_; }
  const Seq2Seq &model() const { return *model_; }

  /// feats is T x input_dim, one frame per row.
  EncoderOutput encode(const Matrix &feats);
  DecoderContext initial_context(const EncoderOutput &enc);
  Attention attend(const DecoderContext &ctx, const EncoderOutput &enc);
  StepOutput decode_step(Var summary, const DecoderContext &ctx, Var weights);
  /// attend() followed by decode_step().
  StepOutput step(const DecoderContext &ctx, const EncoderOutput &enc);

  /// Teacher-forced log p(y|X), y ending in <eos>.
  Var sequence_log_prob(const EncoderOutput &enc, std::span<const int> y);

  /// Parameter gradients after graph().backward(), in block order.
  std::vector<Matrix> gradients() const;

 private:
  struct LstmOut {
    Var h, c;
  };
  LstmOut lstm(Var gates, Var c_prev, int units);

  const Seq2Seq *model_;
  ad::Graph graph_;
  std::vector<Var> p_;
};

/// Emittable id with the highest log-probability; ties go to the smaller id.
int argmax_token(const Matrix &logp);

double sequence_log_prob(const Seq2Seq &model, const Matrix &feats,
                         std::span<const int> y);

}  // namespace papb::model
