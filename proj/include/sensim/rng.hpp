// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sensim {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Stable across platforms, used for id-derived seeds and config hashes.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent stream keyed by (seed, name). Adding or removing other names never
/// changes the sequence produced for this one.
inline Rng substream(std::uint64_t seed, std::string_view name) {
    const std::uint64_t key = mix64(seed ^ mix64(fnv1a64(name)));
    std::seed_seq seq{std::uint32_t(key), std::uint32_t(key >> 32), std::uint32_t(seed), std::uint32_t(seed >> 32)};
    return Rng(seq);
}

inline Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    const std::uint64_t key = mix64(seed ^ mix64(fnv1a64(name) ^ mix64(index)));
    std::seed_seq seq{std::uint32_t(key), std::uint32_t(key >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
    return Rng(seq);
}

/// Uniform double in [0, 1) with 53 random bits; unlike std::uniform_real_distribution
/// the mapping is fixed by this header rather than by the standard library.
inline double uniform01(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

} // namespace sensim
