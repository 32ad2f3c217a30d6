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

#include "papb/autodiff/adadelta.hpp"

#include "papb/error.hpp"

namespace papb::ad {

AdaDeltaState AdaDeltaState::zeros_like(const std::vector<Matrix> &params,
                                        double rho, double epsilon) {
  if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("adadelta: rho must be in (0,1)");
  if (!(epsilon > 0.0)) throw ArgumentError("adadelta: epsilon must be positive");
  AdaDeltaState s;
  s.rho = rho;
  s.epsilon = epsilon;
  for (const Matrix &p : params) {
    s.accum_grad_sq.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.accum_update_sq.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return s;
}

void adadelta_step(std::vector<Matrix> &params, const std::vector<Matrix> &grads,
                   AdaDeltaState &state, double lr) {
  if (!(lr > 0.0)) throw ArgumentError("adadelta: learning rate must be positive");
  if (grads.size() != params.size() || state.accum_grad_sq.size() != params.size() ||
      state.accum_update_sq.size() != params.size())
    throw ArgumentError("adadelta: parameter/gradient/state counts differ");
  const double rho = state.rho, eps = state.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix &p = params[i];
    const Matrix &g = grads[i];
    Matrix &eg = state.accum_grad_sq[i];
    Matrix &ed = state.accum_update_sq[i];
    if (g.rows() != p.rows() || g.cols() != p.cols() || eg.rows() != p.rows() ||
        eg.cols() != p.cols() || ed.rows() != p.rows() || ed.cols() != p.cols())
      throw ArgumentError("adadelta: shape mismatch in block " + std::to_string(i));
    eg.array() = rho * eg.array() + (1.0 - rho) * g.array().square();
    const Eigen::ArrayXXd delta =
        ((ed.array() + eps) / (eg.array() + eps)).sqrt() * g.array();
    p.array() -= lr * delta;
    ed.array() = rho * ed.array() + (1.0 - rho) * delta.square();
  }
}

}  // namespace papb::ad
