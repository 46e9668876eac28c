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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hint {

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
/// Independent of the Graph machinery; used as the oracle for backward().
std::vector<double> finite_diff(const ScalarFn& f, std::span<const double> x, double h = 1e-5);

struct GradientComparison {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Elementwise |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
/// whose true gradient is ~0 from reporting noise as relative error.
GradientComparison compare_gradients(std::span<const double> analytic, std::span<const double> numeric,
                                     double floor = 1e-6);

}  // namespace hint
