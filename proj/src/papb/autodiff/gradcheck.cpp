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

#include "papb/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "papb/error.hpp"

namespace papb::ad {

GradCheckResult finite_diff_check(const ScalarFn &f, std::span<const double> theta,
                                  std::span<const double> analytic, double eps,
                                  double floor) {
  if (!(eps > 0.0)) throw ArgumentError("finite_diff_check: eps must be positive");
  if (!(floor > 0.0)) throw ArgumentError("finite_diff_check: floor must be positive");
  if (analytic.size() != theta.size())
    throw ArgumentError("finite_diff_check: gradient size differs from parameter size");
  std::vector<double> x(theta.begin(), theta.end());
  GradCheckResult res;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double fp = f(x);
    x[i] = orig - eps;
    const double fm = f(x);
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_check: non-finite evaluation at coordinate " +
                         std::to_string(i));
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[i];
    const double err =
        std::abs(a - numeric) / std::max(floor, std::abs(a) + std::abs(numeric));
    if (i == 0 || err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_index = i;
      res.analytic_at_worst = a;
      res.numeric_at_worst = numeric;
    }
  }
  return res;
}

}  // namespace papb::ad
