// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "occlusion_common.hpp"

namespace sensim::simd {

void BoxColumns::reserve(std::size_t n) {
    xmin.reserve(n);
    xmax.reserve(n);
    ymin.reserve(n);
    ymax.reserve(n);
    top.reserve(n);
}

void BoxColumns::push_back(double x0, double x1, double y0, double y1, double height) {
    xmin.push_back(x0);
    xmax.push_back(x1);
    ymin.push_back(y0);
    ymax.push_back(y1);
    top.push_back(height);
}

void BoxColumns::clear() {
    xmin.clear();
    xmax.clear();
    ymin.clear();
    ymax.clear();
    top.clear();
}

BoxView BoxView::subview(std::size_t offset, std::size_t n) const {
    BoxView v;
    v.xmin = xmin + offset;
    v.xmax = xmax + offset;
    v.ymin = ymin + offset;
    v.ymax = ymax + offset;
    v.top = top + offset;
    v.count = n;
    return v;
}

void entry_params_scalar(const Ray& ray, const BoxView& view, double* out) {
    const auto ax = detail::axis_setup(ray.ox, ray.dx);
    const auto ay = detail::axis_setup(ray.oy, ray.dy);
    const auto hz = detail::height_setup(ray.oz, ray.dz);
    for (std::size_t i = 0; i < view.count; ++i) {
        out[i] = detail::entry_one(ax, ay, hz, ray.t_max, view.xmin[i], view.xmax[i], view.ymin[i], view.ymax[i],
                                   view.top[i]);
    }
}

bool any_hit_scalar(const Ray& ray, const BoxView& view) {
    const auto ax = detail::axis_setup(ray.ox, ray.dx);
    const auto ay = detail::axis_setup(ray.oy, ray.dy);
    const auto hz = detail::height_setup(ray.oz, ray.dz);
    for (std::size_t i = 0; i < view.count; ++i) {
        if (detail::entry_one(ax, ay, hz, ray.t_max, view.xmin[i], view.xmax[i], view.ymin[i], view.ymax[i],
                              view.top[i]) != detail::kInf) {
            return true;
        }
    }
    return false;
}

} // namespace sensim::simd
