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

#include <atomic>

#include "oodkit/kernels.hpp"

namespace oodkit::kernels {

namespace {

const KernelTable kScalar{
    Backend::scalar,       scalar::dot_f32,      scalar::dot_f32_f64,
    scalar::dot_f64,       scalar::axpy_f32_f64, scalar::max_f64,
};

#if defined(OODKIT_HAVE_AVX2_KERNELS)
const KernelTable kAvx2{
    Backend::avx2,       avx2::dot_f32,      avx2::dot_f32_f64,
    avx2::dot_f64,       avx2::axpy_f32_f64, avx2::max_f64,
};

bool cpu_has_avx2() noexcept {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable& best() noexcept {
    if (const KernelTable* t = avx2_table()) return *t;
    return kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{&best()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(OODKIT_HAVE_AVX2_KERNELS)
    static const bool supported = cpu_has_avx2();
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Backend backend) noexcept {
    const KernelTable* table = backend == Backend::scalar ? &kScalar : avx2_table();
    if (table == nullptr) return false;
    current().store(table, std::memory_order_release);
    return true;
}

void select_default() noexcept { current().store(&best(), std::memory_order_release); }

std::string_view name(Backend backend) noexcept {
    switch (backend) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace oodkit::kernels
