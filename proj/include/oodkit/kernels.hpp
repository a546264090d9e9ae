/*
 * Copyright 2026 The oodkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Inner-loop arithmetic kernels. Each has a scalar reference implementation
// and, on x86-64, an AVX2+FMA variant chosen at runtime from CPUID. All
// accumulation is binary64 regardless of the input element type.

#include <cstddef>
#include <string_view>

namespace oodkit::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
    Backend backend;
    // sum_i a[i] * b[i]
    double (*dot_f32)(const float* a, const float* b, std::size_t n);
    double (*dot_f32_f64)(const float* a, const double* b, std::size_t n);
    double (*dot_f64)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy_f32_f64)(double alpha, const float* x, double* y, std::size_t n);
    // max_i x[i], n >= 1
    double (*max_f64)(const double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// Null when the build target or the running CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

// Currently selected table. Defaults to the best supported backend.
const KernelTable& active() noexcept;

// Overrides the selection (e.g. scalar for bit-exact serial runs). Returns
// false and leaves the selection unchanged if the backend is unavailable.
bool select(Backend backend) noexcept;

// Restores the CPUID-based default.
void select_default() noexcept;

std::string_view name(Backend backend) noexcept;

namespace scalar {
double dot_f32(const float* a, const float* b, std::size_t n);
double dot_f32_f64(const float* a, const double* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f32_f64(double alpha, const float* x, double* y, std::size_t n);
double max_f64(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define OODKIT_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot_f32(const float* a, const float* b, std::size_t n);
double dot_f32_f64(const float* a, const double* b, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
void axpy_f32_f64(double alpha, const float* x, double* y, std::size_t n);
double max_f64(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace oodkit::kernels
