// Copyright (c) 2026 The HINT-CIR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hint/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "hint/errors.hpp"

namespace hint {

std::vector<double> finite_diff(const ScalarFn& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

GradientComparison compare_gradients(std::span<const double> analytic, std::span<const double> numeric,
                                     double floor) {
  if (analytic.size() != numeric.size()) throw DimensionError("compare_gradients: length mismatch");
  GradientComparison out;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    const double rel = std::abs(a - n) / denom;
    if (i == 0 || rel > out.max_rel_error) out = {rel, i, a, n};
  }
  return out;
}

}  // namespace hint
