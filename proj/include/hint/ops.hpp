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

// Differentiable operations recorded on a Graph. All inputs of one call must
// belong to the same graph. Matrix results are rank 2; rank 1 inputs are read
// as 1 x n.

#include <cstddef>
#include <span>

#include "hint/graph.hpp"

namespace hint {

/// Normalisation direction for softmax. `rows`: every row becomes a
/// distribution. `cols`: every column does.
enum class Axis { rows, cols };

Var add(Var a, Var b);
Var add_row(Var x, Var bias);  // bias (1 x n) added to every row of x (m x n)
Var mul(Var a, Var b);         // elementwise
Var scale(Var x, double factor);

Var matmul(Var a, Var b);
Var transpose(Var x);

/// Max-subtracted softmax along the given axis.
Var softmax(Var x, Axis axis);
/// Row-wise log-softmax.
Var log_softmax(Var x);

/// Row-wise ((x - mean) / sqrt(var + eps)) * gamma + beta with the biased
/// (denominator D) variance.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

Var relu(Var x);  // subgradient 0 at 0

/// Column means of an n x D matrix, as 1 x D.
Var mean_pool(Var x);

Var concat_rows(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
Var slice_cols(Var x, std::size_t begin, std::size_t end);

Var sum(Var x);   // scalar
Var mean(Var x);  // scalar
Var diagonal(Var x);  // n x n -> 1 x n

/// Largest entry as a scalar. Ties resolve to the lowest flat index, and the
/// gradient flows to that entry only.
Var max_entry(Var x);
/// log(sum(exp(x))) over all entries, stabilised.
Var logsumexp(Var x);

/// Each row divided by its Euclidean norm. A zero row raises ArgumentError
/// naming the row index.
Var normalize_rows(Var x);

/// Assemble scalar nodes into a rows x cols matrix (row-major order).
Var stack(std::span<const Var> scalars, std::size_t rows, std::size_t cols);

}  // namespace hint
