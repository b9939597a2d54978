// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Compiled with -mavx2; only reached through the runtime dispatch in dispatch.cpp.

#include <immintrin.h>

#include "occlusion_common.hpp"

namespace sensim::simd {

namespace {

struct AxisLanes {
    __m256d origin;
    __m256d inv;
    bool parallel;
};

AxisLanes lanes(const detail::AxisSetup& a) {
    return {_mm256_set1_pd(a.origin), _mm256_set1_pd(a.inv), a.parallel};
}

inline void axis_interval(const AxisLanes& a, __m256d lo_bound, __m256d hi_bound, __m256d& lo, __m256d& hi) {
    const __m256d pinf = _mm256_set1_pd(detail::kInf);
    const __m256d ninf = _mm256_set1_pd(-detail::kInf);
    if (a.parallel) {
        const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(a.origin, lo_bound, _CMP_GE_OQ),
                                             _mm256_cmp_pd(a.origin, hi_bound, _CMP_LE_OQ));
        lo = _mm256_blendv_pd(pinf, ninf, inside);
        hi = _mm256_blendv_pd(ninf, pinf, inside);
    } else {
        const __m256d ta = _mm256_mul_pd(_mm256_sub_pd(lo_bound, a.origin), a.inv);
        const __m256d tb = _mm256_mul_pd(_mm256_sub_pd(hi_bound, a.origin), a.inv);
        lo = _mm256_min_pd(ta, tb);
        hi = _mm256_max_pd(ta, tb);
    }
}

struct Block {
    const AxisLanes& ax;
    const AxisLanes& ay;
    const detail::HeightSetup& hz;
    __m256d hz_origin;
    __m256d hz_inv;
    __m256d t_max;

    __m256d operator()(const BoxView& v, std::size_t i) const {
        __m256d xlo;
        __m256d xhi;
        __m256d ylo;
        __m256d yhi;
        axis_interval(ax, _mm256_loadu_pd(v.xmin + i), _mm256_loadu_pd(v.xmax + i), xlo, xhi);
        axis_interval(ay, _mm256_loadu_pd(v.ymin + i), _mm256_loadu_pd(v.ymax + i), ylo, yhi);

        const __m256d top = _mm256_loadu_pd(v.top + i);
        const __m256d pinf = _mm256_set1_pd(detail::kInf);
        const __m256d ninf = _mm256_set1_pd(-detail::kInf);
        __m256d zlo;
        __m256d zhi;
        switch (hz.mode) {
        case detail::HeightMode::Rising:
            zlo = ninf;
            zhi = _mm256_mul_pd(_mm256_sub_pd(top, hz_origin), hz_inv);
            break;
        case detail::HeightMode::Falling:
            zlo = _mm256_mul_pd(_mm256_sub_pd(top, hz_origin), hz_inv);
            zhi = pinf;
            break;
        default: {
            const __m256d below = _mm256_cmp_pd(hz_origin, top, _CMP_LE_OQ);
            zlo = _mm256_blendv_pd(pinf, ninf, below);
            zhi = _mm256_blendv_pd(ninf, pinf, below);
        }
        }
        const __m256d enter =
            _mm256_max_pd(_mm256_max_pd(xlo, ylo), _mm256_max_pd(zlo, _mm256_setzero_pd()));
        const __m256d leave = _mm256_min_pd(_mm256_min_pd(xhi, yhi), _mm256_min_pd(zhi, t_max));
        const __m256d hit = _mm256_cmp_pd(enter, leave, _CMP_LE_OQ);
        return _mm256_blendv_pd(pinf, enter, hit);
    }
};

} // namespace

void entry_params_avx2(const Ray& ray, const BoxView& view, double* out) {
    const auto sx = detail::axis_setup(ray.ox, ray.dx);
    const auto sy = detail::axis_setup(ray.oy, ray.dy);
    const auto hz = detail::height_setup(ray.oz, ray.dz);
    const AxisLanes ax = lanes(sx);
    const AxisLanes ay = lanes(sy);
    const Block block{ax, ay, hz, _mm256_set1_pd(hz.origin), _mm256_set1_pd(hz.inv), _mm256_set1_pd(ray.t_max)};

    std::size_t i = 0;
    for (; i + 4 <= view.count; i += 4) {
        _mm256_storeu_pd(out + i, block(view, i));
    }
    for (; i < view.count; ++i) {
        out[i] = detail::entry_one(sx, sy, hz, ray.t_max, view.xmin[i], view.xmax[i], view.ymin[i], view.ymax[i],
                                   view.top[i]);
    }
}

bool any_hit_avx2(const Ray& ray, const BoxView& view) {
    const auto sx = detail::axis_setup(ray.ox, ray.dx);
    const auto sy = detail::axis_setup(ray.oy, ray.dy);
    const auto hz = detail::height_setup(ray.oz, ray.dz);
    const AxisLanes ax = lanes(sx);
    const AxisLanes ay = lanes(sy);
    const Block block{ax, ay, hz, _mm256_set1_pd(hz.origin), _mm256_set1_pd(hz.inv), _mm256_set1_pd(ray.t_max)};
    const __m256d pinf = _mm256_set1_pd(detail::kInf);

    std::size_t i = 0;
    for (; i + 4 <= view.count; i += 4) {
        const __m256d miss = _mm256_cmp_pd(block(view, i), pinf, _CMP_EQ_OQ);
        if (_mm256_movemask_pd(miss) != 0xF) {
            return true;
        }
    }
    for (; i < view.count; ++i) {
        if (detail::entry_one(sx, sy, hz, ray.t_max, view.xmin[i], view.xmax[i], view.ymin[i], view.ymax[i],
                              view.top[i]) != detail::kInf) {
            return true;
        }
    }
    return false;
}

} // namespace sensim::simd
