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

#pragma once

#include <cstddef>
#include <string_view>

// Dense f64 inner loops used by the tensor engine. Every kernel has a
// portable scalar reference and (on x86-64) an AVX2+FMA variant; the
// variant is chosen once per process from CPUID unless LOGNET_SIMD=scalar.
//
// All matrices are row-major and densely packed.

namespace lognet::kernels {

struct KernelTable {
  // C[m×n] += A[m×k] · B[k×n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c);
  // C[m×n] += Aᵀ · B   with A stored k×m
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c);
  // C[m×n] += A · Bᵀ   with B stored n×k
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, const double* b, double* c);
  // y += alpha · x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // out = x ⊙ y
  void (*mul)(std::size_t n, const double* x, const double* y, double* out);
  // y += x ⊙ z
  void (*mul_acc)(std::size_t n, const double* x, const double* z, double* y);
  const char* name;
};

const KernelTable& scalar_table();

// Null when the build has no AVX2 translation unit.
const KernelTable* avx2_table();

bool cpu_has_avx2_fma();

// Active table for this process.
const KernelTable& active();

// Force a table ("scalar" or "avx2"); returns false if unavailable.
bool select(std::string_view name);

}  // namespace lognet::kernels
