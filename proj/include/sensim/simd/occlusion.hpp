// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sensim::simd {

/// Vertical extruded rectangles stored column-wise so the kernels can stream them.
/// Each box spans [xmin, xmax] x [ymin, ymax] x [0, top].
struct BoxColumns {
    std::vector<double> xmin;
    std::vector<double> xmax;
    std::vector<double> ymin;
    std::vector<double> ymax;
    std::vector<double> top;

    std::size_t size() const { return xmin.size(); }
    void reserve(std::size_t n);
    void push_back(double x0, double x1, double y0, double y1, double height);
    void clear();
};

struct BoxView {
    const double* xmin = nullptr;
    const double* xmax = nullptr;
    const double* ymin = nullptr;
    const double* ymax = nullptr;
    const double* top = nullptr;
    std::size_t count = 0;

    BoxView() = default;
    explicit BoxView(const BoxColumns& c)
        : xmin(c.xmin.data()), xmax(c.xmax.data()), ymin(c.ymin.data()), ymax(c.ymax.data()), top(c.top.data()),
          count(c.size()) {}
    BoxView subview(std::size_t offset, std::size_t n) const;
};

/// Parametric 3-D ray p(t) = origin + t * dir for t in [0, t_max]. t_max may be +inf.
struct Ray {
    double ox = 0;
    double oy = 0;
    double oz = 0;
    double dx = 0;
    double dy = 0;
    double dz = 0;
    double t_max = 1.0;
};

/// For every box writes the smallest t in [0, t_max] at which the ray is inside the box
/// footprint with p(t).z <= top (closed intervals), or +inf when there is no such t.
/// out must hold view.count values.
using EntryKernel = void (*)(const Ray& ray, const BoxView& view, double* out);

void entry_params_scalar(const Ray& ray, const BoxView& view, double* out);
#if defined(SENSIM_HAVE_AVX2)
void entry_params_avx2(const Ray& ray, const BoxView& view, double* out);
#endif

/// True if any box is hit; scans in blocks and stops early.
using AnyHitKernel = bool (*)(const Ray& ray, const BoxView& view);

bool any_hit_scalar(const Ray& ray, const BoxView& view);
#if defined(SENSIM_HAVE_AVX2)
bool any_hit_avx2(const Ray& ray, const BoxView& view);
#endif

enum class Isa { Scalar, Avx2 };

/// Best ISA supported by this CPU and build. SENSIM_FORCE_SCALAR=1 in the environment pins Scalar.
Isa detected_isa();
std::string_view isa_name(Isa isa);

EntryKernel entry_kernel(Isa isa);
AnyHitKernel any_hit_kernel(Isa isa);

/// Kernels for detected_isa(), resolved once.
EntryKernel entry_kernel();
AnyHitKernel any_hit_kernel();

} // namespace sensim::simd
