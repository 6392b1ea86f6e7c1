// Copyright 2026 The dmecho Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <string>

#include "dme/error.hpp"
#include "dme/simd/kernels.hpp"

namespace dme::simd {
namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* pick_default() {
  if (const char* env = std::getenv("DME_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
#if defined(DME_HAVE_AVX2_BACKEND)
    if (want == "avx2" && avx2_available()) return &avx2_kernels();
#endif
  }
#if defined(DME_HAVE_AVX2_BACKEND)
  if (avx2_available()) return &avx2_kernels();
#endif
  return &scalar_kernels();
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("simd kernel: span lengths differ");
}

}  // namespace

bool avx2_available() {
#if defined(DME_HAVE_AVX2_BACKEND) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      g_active.store(&scalar_kernels(), std::memory_order_release);
      return;
    case Backend::kAvx2:
#if defined(DME_HAVE_AVX2_BACKEND)
      if (avx2_available()) {
        g_active.store(&avx2_kernels(), std::memory_order_release);
        return;
      }
#endif
      throw InvalidArgument("AVX2 backend not available on this machine");
  }
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
  check_sizes(a.size(), b.size());
  return active().cdot(a.data(), b.data(), a.size());
}

void cmul_inplace(std::span<cplx> x, std::span<const cplx> y) {
  check_sizes(x.size(), y.size());
  active().cmul_inplace(x.data(), y.data(), x.size());
}

double norm2(std::span<const cplx> x) { return active().norm2(x.data(), x.size()); }

}  // namespace dme::simd
