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

// Inner-loop arithmetic used by the tensor ops and the optimizer.
//
// Every kernel has a scalar reference implementation. When the library is
// built for x86-64 an AVX2+FMA variant is compiled as well and selected at
// first use if the CPU supports it. The choice can be pinned with the
// HINT_KERNELS environment variable ("scalar" or "avx2") or set_backend().

#include <cstddef>
#include <span>
#include <string_view>

namespace hint::kernels {

enum class Backend { scalar, avx2 };

std::string_view name(Backend backend) noexcept;

struct AdamWCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double weight_decay;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // Decoupled-weight-decay Adam update, in place on param/m/v.
  void (*adamw)(double* param, const double* grad, double* m, double* v, std::size_t n,
                const AdamWCoefficients& c);
};

bool available(Backend backend) noexcept;
const KernelTable& table(Backend backend);  // throws ArgumentError when unavailable
const KernelTable& active() noexcept;
void set_backend(Backend backend);

enum class Trans { no, yes };

// C (m x n) = op(A) * op(B), or C += ... when accumulate is set. op(A) is m x k.
// A and B are row-major; with Trans::yes the stored matrix is the transpose.
void gemm(const KernelTable& kt, Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

inline void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
                 const double* b, double* c, bool accumulate) {
  gemm(active(), ta, tb, m, n, k, a, b, c, accumulate);
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adamw(double* param, const double* grad, double* m, double* v, std::size_t n,
           const AdamWCoefficients& c);
}  // namespace scalar

#if defined(HINT_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void adamw(double* param, const double* grad, double* m, double* v, std::size_t n,
           const AdamWCoefficients& c);
}  // namespace avx2
#endif

}  // namespace hint::kernels
