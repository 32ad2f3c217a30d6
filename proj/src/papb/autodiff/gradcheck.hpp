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

#include <cstddef>
#include <functional>
#include <span>

namespace papb::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Compares `analytic` against central differences of `f` at `theta`, one
/// coordinate at a time. Relative error per coordinate is
/// |a - n| / max(floor, |a| + |n|); the floor keeps coordinates whose true
/// gradient is zero from reporting pure roundoff as a unit error.
GradCheckResult finite_diff_check(const ScalarFn &f, std::span<const double> theta,
                                  std::span<const double> analytic, double eps,
                                  double floor = 1e-12);

}  // namespace papb::ad
