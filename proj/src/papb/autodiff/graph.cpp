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

#include "papb/autodiff/graph.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "papb/error.hpp"

namespace papb::ad {

namespace {

void require_finite(const Matrix &m, const char *op) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (std::isnan(m.data()[i]))
      throw NumericError(std::string(op) + ": NaN input");
  }
}

void same_shape(const Matrix &a, const Matrix &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError(std::string(op) + ": shape mismatch (" +
                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
}

}  // namespace

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw ArgumentError("logsumexp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (std::isnan(x)) throw NumericError("logsumexp: NaN input");
    if (x > m) m = x;
  }
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Var Graph::push(Matrix value, bool requires_grad,
                std::function<void(Graph &, int)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix &Graph::val(int id) const {
  const Node &n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Matrix &Graph::gref(int id) {
  Node &n = nodes_[id];
  if (!n.has_grad) {
    const Matrix &v = val(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::check(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw ArgumentError("graph: invalid variable handle");
}

Var Graph::constant(Matrix value) { return push(std::move(value), false, {}); }

Var Graph::scalar_constant(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Graph::leaf(Matrix value) { return push(std::move(value), true, {}); }

Var Graph::param(const Matrix &value) {
  Node n;
  n.external = &value;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix &Graph::value(Var v) const {
  check(v);
  return val(v.id);
}

double Graph::scalar(Var v) const {
  const Matrix &m = value(v);
  if (m.size() != 1) throw ArgumentError("graph: value is not a scalar");
  return m(0, 0);
}

Matrix Graph::grad(Var v) const {
  check(v);
  const Node &n = nodes_[v.id];
  if (n.has_grad) return n.grad;
  const Matrix &x = val(v.id);
  return Matrix::Zero(x.rows(), x.cols());
}

bool Graph::requires_grad(Var v) const {
  check(v);
  return nodes_[v.id].requires_grad;
}

void Graph::backward(Var root) {
  check(root);
  if (val(root.id).size() != 1)
    throw ArgumentError("backward: root must be a scalar");
  for (Node &n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  gref(root.id)(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node &n = nodes_[i];
    if (n.has_grad && n.backward) n.backward(*this, i);
  }
}

Var Graph::add(Var a, Var b) {
  check(a);
  check(b);
  same_shape(val(a.id), val(b.id), "add");
  return push(val(a.id) + val(b.id), req(a) || req(b),
              [a, b](Graph &g, int self) {
                if (g.req(a)) g.gref(a.id) += g.gout(self);
                if (g.req(b)) g.gref(b.id) += g.gout(self);
              });
}

Var Graph::sub(Var a, Var b) {
  check(a);
  check(b);
  same_shape(val(a.id), val(b.id), "sub");
  return push(val(a.id) - val(b.id), req(a) || req(b),
              [a, b](Graph &g, int self) {
                if (g.req(a)) g.gref(a.id) += g.gout(self);
                if (g.req(b)) g.gref(b.id) -= g.gout(self);
              });
}

Var Graph::mul(Var a, Var b) {
  check(a);
  check(b);
  same_shape(val(a.id), val(b.id), "mul");
  return push(val(a.id).cwiseProduct(val(b.id)), req(a) || req(b),
              [a, b](Graph &g, int self) {
                if (g.req(a))
                  g.gref(a.id) += g.gout(self).cwiseProduct(g.val(b.id));
                if (g.req(b))
                  g.gref(b.id) += g.gout(self).cwiseProduct(g.val(a.id));
              });
}

Var Graph::scale(Var a, double c) {
  check(a);
  return push(val(a.id) * c, req(a), [a, c](Graph &g, int self) {
    g.gref(a.id) += g.gout(self) * c;
  });
}

Var Graph::add_scalar(Var a, double c) {
  check(a);
  return push((val(a.id).array() + c).matrix(), req(a),
              [a](Graph &g, int self) { g.gref(a.id) += g.gout(self); });
}

Var Graph::sigmoid(Var a) {
  check(a);
  Matrix y = (1.0 / (1.0 + (-val(a.id).array()).exp())).matrix();
  return push(std::move(y), req(a), [a](Graph &g, int self) {
    const auto y = g.val(self).array();
    g.gref(a.id).array() += g.gout(self).array() * y * (1.0 - y);
  });
}

Var Graph::tanh(Var a) {
  check(a);
  return push(val(a.id).array().tanh().matrix(), req(a),
              [a](Graph &g, int self) {
                const auto y = g.val(self).array();
                g.gref(a.id).array() += g.gout(self).array() * (1.0 - y * y);
              });
}

Var Graph::exp(Var a) {
  check(a);
  return push(val(a.id).array().exp().matrix(), req(a),
              [a](Graph &g, int self) {
                g.gref(a.id).array() +=
                    g.gout(self).array() * g.val(self).array();
              });
}

Var Graph::log(Var a) {
  check(a);
  return push(val(a.id).array().log().matrix(), req(a),
              [a](Graph &g, int self) {
                g.gref(a.id).array() +=
                    g.gout(self).array() / g.val(a.id).array();
              });
}

Var Graph::matmul(Var a, Var b) {
  check(a);
  check(b);
  const Matrix &x = val(a.id);
  const Matrix &y = val(b.id);
  if (x.cols() != y.rows())
    throw ArgumentError("matmul: inner dimensions differ (" +
                        std::to_string(x.cols()) + " vs " +
                        std::to_string(y.rows()) + ")");
  Matrix out = x * y;
  return push(std::move(out), req(a) || req(b), [a, b](Graph &g, int self) {
    const Matrix &gy = g.gout(self);
    if (g.req(a)) g.gref(a.id).noalias() += gy * g.val(b.id).transpose();
    if (g.req(b)) g.gref(b.id).noalias() += g.val(a.id).transpose() * gy;
  });
}

Var Graph::add_col(Var m, Var column) {
  check(m);
  check(column);
  const Matrix &x = val(m.id);
  const Matrix &c = val(column.id);
  if (c.cols() != 1 || c.rows() != x.rows())
    throw ArgumentError("add_col: column must be rows(m) x 1");
  Matrix out = x.colwise() + c.col(0);
  return push(std::move(out), req(m) || req(column),
              [m, column](Graph &g, int self) {
                const Matrix &gy = g.gout(self);
                if (g.req(m)) g.gref(m.id) += gy;
                if (g.req(column)) g.gref(column.id) += gy.rowwise().sum();
              });
}

Var Graph::transpose(Var a) {
  check(a);
  return push(val(a.id).transpose(), req(a), [a](Graph &g, int self) {
    g.gref(a.id) += g.gout(self).transpose();
  });
}

Var Graph::col(Var a, int j) {
  check(a);
  const Matrix &x = val(a.id);
  if (j < 0 || j >= x.cols()) throw ArgumentError("col: index out of range");
  return push(x.col(j), req(a), [a, j](Graph &g, int self) {
    g.gref(a.id).col(j) += g.gout(self);
  });
}

Var Graph::rows(Var a, int start, int count) {
  check(a);
  const Matrix &x = val(a.id);
  if (start < 0 || count < 0 || start + count > x.rows())
    throw ArgumentError("rows: range out of bounds");
  return push(x.middleRows(start, count), req(a),
              [a, start, count](Graph &g, int self) {
                g.gref(a.id).middleRows(start, count) += g.gout(self);
              });
}

Var Graph::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_rows: no operands");
  Eigen::Index total = 0;
  const Eigen::Index cols = val(parts[0].id).cols();
  bool any = false;
  for (Var p : parts) {
    check(p);
    if (val(p.id).cols() != cols)
      throw ArgumentError("concat_rows: column counts differ");
    total += val(p.id).rows();
    any = any || req(p);
  }
  Matrix out(total, cols);
  Eigen::Index off = 0;
  for (Var p : parts) {
    const Matrix &x = val(p.id);
    out.middleRows(off, x.rows()) = x;
    off += x.rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), any, [ps](Graph &g, int self) {
    Eigen::Index o = 0;
    for (Var p : ps) {
      const Eigen::Index r = g.val(p.id).rows();
      if (g.req(p)) g.gref(p.id) += g.gout(self).middleRows(o, r);
      o += r;
    }
  });
}

Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no operands");
  Eigen::Index total = 0;
  const Eigen::Index rows = val(parts[0].id).rows();
  bool any = false;
  for (Var p : parts) {
    check(p);
    if (val(p.id).rows() != rows)
      throw ArgumentError("concat_cols: row counts differ");
    total += val(p.id).cols();
    any = any || req(p);
  }
  Matrix out(rows, total);
  Eigen::Index off = 0;
  for (Var p : parts) {
    const Matrix &x = val(p.id);
    out.middleCols(off, x.cols()) = x;
    off += x.cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), any, [ps](Graph &g, int self) {
    Eigen::Index o = 0;
    for (Var p : ps) {
      const Eigen::Index c = g.val(p.id).cols();
      if (g.req(p)) g.gref(p.id) += g.gout(self).middleCols(o, c);
      o += c;
    }
  });
}

Var Graph::sum(Var a) {
  check(a);
  Matrix out(1, 1);
  out(0, 0) = val(a.id).sum();
  return push(std::move(out), req(a), [a](Graph &g, int self) {
    g.gref(a.id).array() += g.gout(self)(0, 0);
  });
}

Var Graph::sum_n(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("sum_n: no operands");
  check(parts[0]);
  Matrix out = val(parts[0].id);
  bool any = req(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    check(parts[i]);
    same_shape(out, val(parts[i].id), "sum_n");
    out += val(parts[i].id);
    any = any || req(parts[i]);
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), any, [ps](Graph &g, int self) {
    for (Var p : ps)
      if (g.req(p)) g.gref(p.id) += g.gout(self);
  });
}

Var Graph::pick(Var a, int row, int column) {
  check(a);
  const Matrix &x = val(a.id);
  if (row < 0 || row >= x.rows() || column < 0 || column >= x.cols())
    throw ArgumentError("pick: index out of range");
  Matrix out(1, 1);
  out(0, 0) = x(row, column);
  return push(std::move(out), req(a), [a, row, column](Graph &g, int self) {
    g.gref(a.id)(row, column) += g.gout(self)(0, 0);
  });
}

Var Graph::softmax(Var a) {
  check(a);
  const Matrix &x = val(a.id);
  if (x.size() == 0) throw ArgumentError("softmax: empty input");
  require_finite(x, "softmax");
  Matrix y = (x.array() - x.maxCoeff()).exp().matrix();
  y /= y.sum();
  return push(std::move(y), req(a), [a](Graph &g, int self) {
    const Matrix &y = g.val(self);
    const Matrix &gy = g.gout(self);
    const double dot = gy.cwiseProduct(y).sum();
    g.gref(a.id).array() += y.array() * (gy.array() - dot);
  });
}

Var Graph::log_softmax(Var a, int first) {
  check(a);
  const Matrix &x = val(a.id);
  const int n = static_cast<int>(x.rows());
  if (x.cols() != 1) throw ArgumentError("log_softmax: expects a column vector");
  if (first < 0 || first >= n) throw ArgumentError("log_softmax: empty range");
  require_finite(x, "log_softmax");
  const auto active = x.middleRows(first, n - first);
  const double m = active.maxCoeff();
  const double lse = m + std::log((active.array() - m).exp().sum());
  Matrix y(n, 1);
  y.topRows(first).setConstant(-std::numeric_limits<double>::infinity());
  y.middleRows(first, n - first) = (active.array() - lse).matrix();
  return push(std::move(y), req(a), [a, first, n](Graph &g, int self) {
    const auto y = g.val(self).middleRows(first, n - first);
    const auto gy = g.gout(self).middleRows(first, n - first);
    const double total = gy.sum();
    g.gref(a.id).middleRows(first, n - first).array() +=
        gy.array() - y.array().exp() * total;
  });
}

Var Graph::logsumexp(Var a) {
  check(a);
  const Matrix &x = val(a.id);
  if (x.size() == 0) throw ArgumentError("logsumexp: empty input");
  const double lse =
      papb::ad::logsumexp(std::span<const double>(x.data(), x.size()));
  if (!std::isfinite(lse)) throw NumericError("logsumexp: non-finite result");
  Matrix out(1, 1);
  out(0, 0) = lse;
  return push(std::move(out), req(a), [a](Graph &g, int self) {
    const double s = g.val(self)(0, 0);
    g.gref(a.id).array() +=
        g.gout(self)(0, 0) * (g.val(a.id).array() - s).exp();
  });
}

Var Graph::conv1d(Var signal, Var kernel) {
  check(signal);
  check(kernel);
  const Matrix &s = val(signal.id);
  const Matrix &k = val(kernel.id);
  if (s.cols() != 1) throw ArgumentError("conv1d: signal must be T x 1");
  const int T = static_cast<int>(s.rows());
  const int C = static_cast<int>(k.rows());
  const int K = static_cast<int>(k.cols());
  const int pad = K / 2;
  Matrix out = Matrix::Zero(C, T);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < K; ++j) {
      const int src = t + j - pad;
      if (src < 0 || src >= T) continue;
      out.col(t) += k.col(j) * s(src, 0);
    }
  }
  return push(std::move(out), req(signal) || req(kernel),
              [signal, kernel, T, K, pad](Graph &g, int self) {
                const Matrix &gy = g.gout(self);
                const Matrix &s = g.val(signal.id);
                const Matrix &k = g.val(kernel.id);
                const bool rs = g.req(signal), rk = g.req(kernel);
                for (int t = 0; t < T; ++t) {
                  for (int j = 0; j < K; ++j) {
                    const int src = t + j - pad;
                    if (src < 0 || src >= T) continue;
                    if (rs) g.gref(signal.id)(src, 0) += k.col(j).dot(gy.col(t));
                    if (rk) g.gref(kernel.id).col(j) += gy.col(t) * s(src, 0);
                  }
                }
              });
}

}  // namespace papb::ad
