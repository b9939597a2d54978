// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <string_view>

#include "sensim/simd/occlusion.hpp"

namespace sensim::simd {

namespace {

bool force_scalar() {
    const char* env = std::getenv("SENSIM_FORCE_SCALAR");
    return env != nullptr && std::string_view(env) != "" && std::string_view(env) != "0";
}

bool cpu_has_avx2() {
#if defined(SENSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

} // namespace

Isa detected_isa() {
    static const Isa isa = (!force_scalar() && cpu_has_avx2()) ? Isa::Avx2 : Isa::Scalar;
    return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

EntryKernel entry_kernel(Isa isa) {
#if defined(SENSIM_HAVE_AVX2)
    if (isa == Isa::Avx2) {
        return &entry_params_avx2;
    }
#endif
    (void)isa;
    return &entry_params_scalar;
}

AnyHitKernel any_hit_kernel(Isa isa) {
#if defined(SENSIM_HAVE_AVX2)
    if (isa == Isa::Avx2) {
        return &any_hit_avx2;
    }
#endif
    (void)isa;
    return &any_hit_scalar;
}

EntryKernel entry_kernel() {
    static const EntryKernel k = entry_kernel(detected_isa());
    return k;
}

AnyHitKernel any_hit_kernel() {
    static const AnyHitKernel k = any_hit_kernel(detected_isa());
    return k;
}

} // namespace sensim::simd
