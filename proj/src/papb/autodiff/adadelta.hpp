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

#include "papb/autodiff/graph.hpp"

namespace papb::ad {

/// Running averages for AdaDelta, one pair of matrices per parameter block.
struct AdaDeltaState {
  std::vector<Matrix> accum_grad_sq;
  std::vector<Matrix> accum_update_sq;
  double rho = 0.95;
  double epsilon = 1e-6;

  /// Zero accumulators shaped like `params`.
  static AdaDeltaState zeros_like(const std::vector<Matrix> &params,
                                  double rho = 0.95, double epsilon = 1e-6);
};

/// One AdaDelta update in place. The accumulators track the unscaled step;
/// `lr` multiplies only the applied update.
void adadelta_step(std::vector<Matrix> &params, const std::vector<Matrix> &grads,
                   AdaDeltaState &state, double lr);

}  // namespace papb::ad
