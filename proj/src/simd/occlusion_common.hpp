// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <limits>

#include "sensim/simd/occlusion.hpp"

namespace sensim::simd::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// How one axis of the ray maps box bounds onto parameter intervals. A zero direction
/// component is resolved per box by a containment test instead of a division.
struct AxisSetup {
    bool parallel = false;
    double origin = 0;
    double inv = 0;
};

inline AxisSetup axis_setup(double origin, double dir) {
    AxisSetup a;
    a.origin = origin;
    a.parallel = (dir == 0.0);
    a.inv = a.parallel ? 0.0 : 1.0 / dir;
    return a;
}

enum class HeightMode { Rising, Falling, Level };

struct HeightSetup {
    HeightMode mode = HeightMode::Level;
    double origin = 0;
    double inv = 0;
};

inline HeightSetup height_setup(double oz, double dz) {
    HeightSetup h;
    h.origin = oz;
    if (dz > 0) {
        h.mode = HeightMode::Rising;
        h.inv = 1.0 / dz;
    } else if (dz < 0) {
        h.mode = HeightMode::Falling;
        h.inv = 1.0 / dz;
    }
    return h;
}

// Same selection rule as vmaxpd / vminpd so both paths agree bit for bit.
inline double max2(double a, double b) { return a > b ? a : b; }
inline double min2(double a, double b) { return a < b ? a : b; }

/// Scalar reference for one box. The AVX2 path reproduces exactly this operation order.
inline double entry_one(const AxisSetup& ax, const AxisSetup& ay, const HeightSetup& hz, double t_max, double x0,
                        double x1, double y0, double y1, double top) {
    double xlo;
    double xhi;
    if (ax.parallel) {
        const bool inside = ax.origin >= x0 && ax.origin <= x1;
        xlo = inside ? -kInf : kInf;
        xhi = inside ? kInf : -kInf;
    } else {
        const double ta = (x0 - ax.origin) * ax.inv;
        const double tb = (x1 - ax.origin) * ax.inv;
        xlo = min2(ta, tb);
        xhi = max2(ta, tb);
    }
    double ylo;
    double yhi;
    if (ay.parallel) {
        const bool inside = ay.origin >= y0 && ay.origin <= y1;
        ylo = inside ? -kInf : kInf;
        yhi = inside ? kInf : -kInf;
    } else {
        const double ta = (y0 - ay.origin) * ay.inv;
        const double tb = (y1 - ay.origin) * ay.inv;
        ylo = min2(ta, tb);
        yhi = max2(ta, tb);
    }
    double zlo;
    double zhi;
    switch (hz.mode) {
    case HeightMode::Rising:
        zlo = -kInf;
        zhi = (top - hz.origin) * hz.inv;
        break;
    case HeightMode::Falling:
        zlo = (top - hz.origin) * hz.inv;
        zhi = kInf;
        break;
    default: {
        const bool below = hz.origin <= top;
        zlo = below ? -kInf : kInf;
        zhi = below ? kInf : -kInf;
    }
    }
    const double enter = max2(max2(xlo, ylo), max2(zlo, 0.0));
    const double leave = min2(min2(xhi, yhi), min2(zhi, t_max));
    return enter <= leave ? enter : kInf;
}

} // namespace sensim::simd::detail
