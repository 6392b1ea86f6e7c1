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

#pragma once

// Data-parallel inner loops used by the spectral time-series evaluator and
// the memory-kernel solver. Every kernel has a portable scalar reference and
// an AVX2/FMA variant; the variant is chosen once at first use from the CPU
// features, or forced with the DME_SIMD environment variable
// ("scalar" or "avx2").

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace dme::simd {

using cplx = std::complex<double>;

enum class Backend { kScalar, kAvx2 };

/// Function table for one backend. All spans passed to a kernel must have
/// equal length; the dispatch wrappers below check that.
struct KernelTable {
  Backend backend;
  const char* name;
  // sum_k a[k] * b[k]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_k a[k] * b[k] (complex, no conjugation)
  cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
  // x[k] *= y[k]
  void (*cmul_inplace)(cplx* x, const cplx* y, std::size_t n);
  // sum_k |x[k]|^2
  double (*norm2)(const cplx* x, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(DME_HAVE_AVX2_BACKEND)
const KernelTable& avx2_kernels();
#endif

/// True when this binary carries the AVX2 backend and the CPU supports
/// AVX2 and FMA.
bool avx2_available();

/// Table in use. Selected on first call.
const KernelTable& active();

/// Override the selection (tests, benchmarks). Throws InvalidArgument if the
/// requested backend is not available on this machine.
void select(Backend backend);

std::string_view backend_name(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);
void cmul_inplace(std::span<cplx> x, std::span<const cplx> y);
double norm2(std::span<const cplx> x);

}  // namespace dme::simd
