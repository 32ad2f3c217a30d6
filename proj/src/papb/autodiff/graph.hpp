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
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace papb::ad {

using Matrix = Eigen::MatrixXd;

/// Handle to a node of a Graph. Only meaningful together with the graph that
/// created it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Tape-based reverse-mode differentiation over dense double matrices.
///
/// Nodes are appended in evaluation order, so the tape is already a
/// topological order; backward() walks it once from the root towards the
/// leaves. Column vectors are n x 1 matrices and scalars are 1 x 1.
///
/// Parameter leaves created with param() reference external storage, which
/// must outlive the graph and must not change while the graph is alive.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;
  Graph(Graph &&) = default;
  Graph &operator=(Graph &&) = default;

  Var constant(Matrix value);
  Var scalar_constant(double value);
  Var leaf(Matrix value);
  Var param(const Matrix &value);

  const Matrix &value(Var v) const;
  double scalar(Var v) const;
  /// Gradient of the last backward() root w.r.t. v; zeros if v was not
  /// reached.
  Matrix grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t num_nodes() const { return nodes_.size(); }

  /// Runs reverse accumulation from a 1 x 1 root. Gradients from any
  /// previous call are discarded first.
  void backward(Var root);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);

  Var matmul(Var a, Var b);
  /// m (r x c) plus a column (r x 1) added to every column.
  Var add_col(Var m, Var column);
  Var transpose(Var a);
  Var col(Var a, int j);
  Var rows(Var a, int start, int count);
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);

  Var sum(Var a);
  /// Elementwise sum of same-shaped operands.
  Var sum_n(std::span<const Var> parts);
  Var pick(Var a, int row, int column = 0);

  Var softmax(Var a);
  /// Log-softmax of a column vector restricted to rows [first, n); rows
  /// below `first` are masked to -inf and receive no gradient.
  Var log_softmax(Var a, int first = 0);
  Var logsumexp(Var a);
  /// Same-padded 1-D correlation of a T x 1 signal with a C x K kernel bank;
  /// output is C x T.
  Var conv1d(Var signal, Var kernel);

 private:
  struct Node {
    Matrix value;
    const Matrix *external = nullptr;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::function<void(Graph &, int)> backward;
  };

  Var push(Matrix value, bool requires_grad,
           std::function<void(Graph &, int)> backward);
  bool req(Var v) const { return nodes_[v.id].requires_grad; }
  const Matrix &val(int id) const;
  const Matrix &gout(int id) const { return nodes_[id].grad; }
  Matrix &gref(int id);
  void check(Var v) const;

  std::vector<Node> nodes_;
};

/// log(sum(exp(v))) computed by shifting with the maximum.
double logsumexp(std::span<const double> v);

}  // namespace papb::ad
