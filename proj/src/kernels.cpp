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

#include "hint/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "hint/errors.hpp"

namespace hint::kernels {
namespace {

constexpr KernelTable kScalarTable{Backend::scalar, &scalar::dot, &scalar::axpy, &scalar::adamw};

#if defined(HINT_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Backend::avx2, &avx2::dot, &avx2::axpy, &avx2::adamw};
#endif

bool cpu_has_avx2() noexcept {
#if defined(HINT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick_default() noexcept {
  const char* forced = std::getenv("HINT_KERNELS");
  if (forced && std::strcmp(forced, "scalar") == 0) return &kScalarTable;
#if defined(HINT_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> slot{pick_default()};
  return slot;
}

}  // namespace

std::string_view name(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Backend backend) noexcept {
  return backend == Backend::scalar || (backend == Backend::avx2 && cpu_has_avx2());
}

const KernelTable& table(Backend backend) {
  if (backend == Backend::scalar) return kScalarTable;
#if defined(HINT_HAVE_AVX2)
  if (cpu_has_avx2()) return kAvx2Table;
#endif
  throw ArgumentError("kernel backend '" + std::string(name(backend)) + "' is not available on this machine");
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void set_backend(Backend backend) { current().store(&table(backend), std::memory_order_release); }

void gemm(const KernelTable& kt, Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  if (ta == Trans::no && tb == Trans::no) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) kt.axpy(a[i * k + p], b + p * n, c + i * n, n);
  } else if (ta == Trans::no && tb == Trans::yes) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += kt.dot(a + i * k, b + j * k, k);
  } else if (ta == Trans::yes && tb == Trans::no) {
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) kt.axpy(a[p * m + i], b + p * n, c + i * n, n);
  } else {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] += acc;
      }
  }
}

}  // namespace hint::kernels
