/*
 * Copyright 2026 The LOGNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Compiled with -mavx2 -mfma. Nothing in here may run before the
// dispatcher has confirmed CPU support.

#include "lognet/kernels.hpp"

#include <immintrin.h>

namespace lognet::kernels {
namespace {

// One output row segment of 16 columns kept in four registers while the
// reduction index advances; `a_at(p)` yields the scalar multiplier.
template <class AScalar>
inline void row_block16(std::size_t n, std::size_t k, AScalar a_at,
                        const double* b, double* crow, std::size_t j) {
  __m256d c0 = _mm256_loadu_pd(crow + j);
  __m256d c1 = _mm256_loadu_pd(crow + j + 4);
  __m256d c2 = _mm256_loadu_pd(crow + j + 8);
  __m256d c3 = _mm256_loadu_pd(crow + j + 12);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d av = _mm256_set1_pd(a_at(p));
    const double* brow = b + p * n + j;
    c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
    c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
    c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
    c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
  }
  _mm256_storeu_pd(crow + j, c0);
  _mm256_storeu_pd(crow + j + 4, c1);
  _mm256_storeu_pd(crow + j + 8, c2);
  _mm256_storeu_pd(crow + j + 12, c3);
}

template <class AScalar>
inline void row_product(std::size_t n, std::size_t k, AScalar a_at, const double* b,
                        double* crow) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) row_block16(n, k, a_at, b, crow, j);
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_loadu_pd(crow + j);
    for (std::size_t p = 0; p < k; ++p)
      c0 = _mm256_fmadd_pd(_mm256_set1_pd(a_at(p)), _mm256_loadu_pd(b + p * n + j), c0);
    _mm256_storeu_pd(crow + j, c0);
  }
  for (; j < n; ++j) {
    double s = crow[j];
    for (std::size_t p = 0; p < k; ++p) s = __builtin_fma(a_at(p), b[p * n + j], s);
    crow[j] = s;
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    row_product(n, k, [arow](std::size_t p) { return arow[p]; }, b, c + i * n);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i)
    row_product(n, k, [a, m, i](std::size_t p) { return a[p * m + i]; }, b, c + i * n);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s = __builtin_fma(x[i], y[i], s);
  return s;
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, a + i * k, b + j * k);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = __builtin_fma(alpha, x[i], y[i]);
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void mul_acc(std::size_t n, const double* x, const double* z, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = __builtin_fma(x[i], z[i], y[i]);
}

constexpr KernelTable kAvx2{gemm_nn, gemm_tn, gemm_nt, axpy, dot, mul, mul_acc, "avx2"};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace lognet::kernels
