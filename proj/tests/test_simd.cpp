// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <doctest.h>

#include "sensim/rng.hpp"
#include "sensim/simd/occlusion.hpp"

using namespace sensim;
using namespace sensim::simd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest t in [0, t_max] inside the footprint with z(t) <= top, by interval clipping.
double reference_entry(const Ray& r, double x0, double x1, double y0, double y1, double top) {
    double lo = 0;
    double hi = r.t_max;
    auto clip = [&](double o, double d, double a, double b) {
        if (d == 0) {
            return o >= a && o <= b;
        }
        const double t0 = std::min((a - o) / d, (b - o) / d);
        const double t1 = std::max((a - o) / d, (b - o) / d);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
        return lo <= hi;
    };
    if (!clip(r.ox, r.dx, x0, x1) || !clip(r.oy, r.dy, y0, y1)) {
        return kInf;
    }
    if (r.dz == 0) {
        return r.oz <= top ? lo : kInf;
    }
    const double tz = (top - r.oz) / r.dz;
    if (r.dz > 0) {
        hi = std::min(hi, tz);
    } else {
        lo = std::max(lo, tz);
    }
    return lo <= hi ? lo : kInf;
}

BoxColumns random_boxes(Rng& rng, std::size_t n) {
    BoxColumns c;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = uniform(rng, -200, 200);
        const double y = uniform(rng, -200, 200);
        const double w = uniform(rng, 1, 60);
        const double d = uniform(rng, 1, 60);
        c.push_back(x - w / 2, x + w / 2, y - d / 2, y + d / 2, uniform(rng, 0, 80));
    }
    return c;
}

Ray random_ray(Rng& rng) {
    Ray r{uniform(rng, -100, 100), uniform(rng, -100, 100), uniform(rng, 0, 10), uniform(rng, -1, 1),
          uniform(rng, -1, 1),     uniform(rng, -0.3, 0.5), uniform(rng, 0, 1) < 0.5 ? kInf : uniform(rng, 1, 500)};
    // Axis-aligned and level rays exercise the zero-direction branches.
    const double u = uniform(rng, 0, 1);
    if (u < 0.1) {
        r.dx = 0;
    } else if (u < 0.2) {
        r.dy = 0;
    } else if (u < 0.3) {
        r.dz = 0;
    }
    return r;
}

bool avx2_usable() {
#if defined(SENSIM_HAVE_AVX2)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

} // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar kernel matches interval clipping") {
    Rng rng(1);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto boxes = random_boxes(rng, 1 + std::size_t(uniform(rng, 0, 40)));
        const Ray ray = random_ray(rng);
        std::vector<double> out(boxes.size());
        entry_params_scalar(ray, BoxView(boxes), out.data());
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const double want = reference_entry(ray, boxes.xmin[i], boxes.xmax[i], boxes.ymin[i], boxes.ymax[i],
                                                boxes.top[i]);
            if (std::isinf(want)) {
                CHECK(std::isinf(out[i]));
            } else {
                CHECK(out[i] == doctest::Approx(want).epsilon(1e-12).scale(1.0));
            }
        }
        const bool any = std::any_of(out.begin(), out.end(), [](double t) { return !std::isinf(t); });
        CHECK(any_hit_scalar(ray, BoxView(boxes)) == any);
    }
}

TEST_CASE("AVX2 kernels are bit-identical to scalar") {
    if (!avx2_usable()) {
        MESSAGE("AVX2 not available on this build or CPU; equivalence skipped");
        return;
    }
    Rng rng(2);
    std::size_t hits = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        // Odd sizes cover the tail after the last full vector.
        const auto boxes = random_boxes(rng, std::size_t(uniform(rng, 0, 67)));
        const Ray ray = random_ray(rng);
        std::vector<double> s(boxes.size()), v(boxes.size());
        entry_kernel(Isa::Scalar)(ray, BoxView(boxes), s.data());
        entry_kernel(Isa::Avx2)(ray, BoxView(boxes), v.data());
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            REQUIRE(std::memcmp(&s[i], &v[i], sizeof(double)) == 0);
            hits += !std::isinf(s[i]);
        }
        CHECK(any_hit_kernel(Isa::Scalar)(ray, BoxView(boxes)) == any_hit_kernel(Isa::Avx2)(ray, BoxView(boxes)));
        if (boxes.size() > 3) {
            const auto sub = BoxView(boxes).subview(1, boxes.size() - 2);
            CHECK(any_hit_kernel(Isa::Scalar)(ray, sub) == any_hit_kernel(Isa::Avx2)(ray, sub));
        }
    }
    CHECK(hits > 1000);
}

TEST_CASE("boundary contact counts as a hit in both kernels") {
    BoxColumns c;
    c.push_back(10, 20, -5, 5, 10);
    const Ray grazing_top{0, 0, 10, 1, 0, 0, kInf}; // level with the roof
    const Ray touching_face{0, 5, 0, 1, 0, 0, kInf}; // runs along the y = 5 face
    const Ray short_ray{0, 0, 0, 1, 0, 0, 9.999};
    for (const Isa isa : {Isa::Scalar, Isa::Avx2}) {
        if (isa == Isa::Avx2 && !avx2_usable()) {
            continue;
        }
        double t = 0;
        entry_kernel(isa)(grazing_top, BoxView(c), &t);
        CHECK(t == 10.0);
        entry_kernel(isa)(touching_face, BoxView(c), &t);
        CHECK(t == 10.0);
        CHECK_FALSE(any_hit_kernel(isa)(short_ray, BoxView(c)));
    }
}

TEST_CASE("empty views never hit") {
    BoxColumns c;
    const Ray r{0, 0, 0, 1, 0, 0, kInf};
    CHECK_FALSE(any_hit_scalar(r, BoxView(c)));
    CHECK_FALSE(any_hit_kernel()(r, BoxView(c)));
}

TEST_CASE("dispatch names") {
    CHECK(isa_name(Isa::Scalar) == "scalar");
    CHECK(isa_name(Isa::Avx2) == "avx2");
    CHECK(entry_kernel(Isa::Scalar) == &entry_params_scalar);
    if (detected_isa() == Isa::Avx2) {
        CHECK(avx2_usable());
    }
}

} // TEST_SUITE
