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

#include <immintrin.h>

#include "dme/simd/kernels.hpp"

// Complex values are stored interleaved (re, im), so one __m256d holds two
// complex numbers.

namespace dme::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

// (a + ib)(c + id): real = ac - bd, imag = ad + bc. Accumulate the products
// a*[c,d] and b*[d,c] separately and combine once at the end.
cplx cdot_avx2(const cplx* x, const cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  __m256d acc_re = _mm256_setzero_pd();  // [a c, a d] pairs
  __m256d acc_im = _mm256_setzero_pd();  // [b d, b c] pairs
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * k);
    const __m256d xre = _mm256_movedup_pd(xv);          // a a
    const __m256d xim = _mm256_permute_pd(xv, 0b1111);  // b b
    const __m256d yswap = _mm256_permute_pd(yv, 0b0101);  // d c
    acc_re = _mm256_fmadd_pd(xre, yv, acc_re);
    acc_im = _mm256_fmadd_pd(xim, yswap, acc_im);
  }
  alignas(32) double r[4];
  alignas(32) double i[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(i, acc_im);
  double re = (r[0] - i[0]) + (r[2] - i[2]);
  double im = (r[1] + i[1]) + (r[3] + i[3]);
  for (; k < n; ++k) {
    re += x[k].real() * y[k].real() - x[k].imag() * y[k].imag();
    im += x[k].real() * y[k].imag() + x[k].imag() * y[k].real();
  }
  return {re, im};
}

void cmul_inplace_avx2(cplx* x, const cplx* y, std::size_t n) {
  double* xp = reinterpret_cast<double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * k);
    const __m256d yre = _mm256_movedup_pd(yv);           // c c
    const __m256d yim = _mm256_permute_pd(yv, 0b1111);   // d d
    const __m256d xswap = _mm256_permute_pd(xv, 0b0101); // b a
    // [a c - b d, b c + a d]
    _mm256_storeu_pd(xp + 2 * k, _mm256_fmaddsub_pd(xv, yre, _mm256_mul_pd(xswap, yim)));
  }
  for (; k < n; ++k) {
    const double re = x[k].real() * y[k].real() - x[k].imag() * y[k].imag();
    const double im = x[k].real() * y[k].imag() + x[k].imag() * y[k].real();
    x[k] = {re, im};
  }
}

double norm2_avx2(const cplx* x, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= m; k += 8) {
    const __m256d v0 = _mm256_loadu_pd(xp + k);
    const __m256d v1 = _mm256_loadu_pd(xp + k + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < m; ++k) s += xp[k] * xp[k];
  return s;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Backend::kAvx2, "avx2", dot_avx2, cdot_avx2,
                                 cmul_inplace_avx2, norm2_avx2};
  return table;
}

}  // namespace dme::simd
