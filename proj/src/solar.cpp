// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/solar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sensim::solar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct YearTerms {
    double declination; // radians
    double eq_time;     // minutes
};

/// Fractional-year Fourier series for declination and the equation of time.
YearTerms year_terms(UnixMs t) {
    const double hour = double(t - utc_day_index(t) * kMsPerDay) / double(kMsPerHour);
    const CivilDate c = to_civil(t);
    const bool leap = (c.year % 4 == 0 && c.year % 100 != 0) || c.year % 400 == 0;
    const double days_in_year = leap ? 366.0 : 365.0;
    const double g = 2.0 * kPi / days_in_year * (day_of_year(t) - 1 + (hour - 12.0) / 24.0);
    YearTerms y;
    y.eq_time = 229.18 * (0.000075 + 0.001868 * std::cos(g) - 0.032077 * std::sin(g) -
                          0.014615 * std::cos(2 * g) - 0.040849 * std::sin(2 * g));
    y.declination = 0.006918 - 0.399912 * std::cos(g) + 0.070257 * std::sin(g) - 0.006758 * std::cos(2 * g) +
                    0.000907 * std::sin(2 * g) - 0.002697 * std::cos(3 * g) + 0.00148 * std::sin(3 * g);
    return y;
}

} // namespace

double declination_deg(UnixMs t) { return year_terms(t).declination / kDeg; }

SunPosition sun_position(double lat_deg, double lon_deg, UnixMs t) {
    if (!(std::abs(lat_deg) <= 90.0)) {
        throw std::invalid_argument("sun_position: latitude outside [-90, 90]");
    }
    const YearTerms y = year_terms(t);
    const double minutes = double(t - utc_day_index(t) * kMsPerDay) / double(kMsPerMinute);
    const double true_solar = minutes + y.eq_time + 4.0 * lon_deg;
    const double hour_angle = (true_solar / 4.0 - 180.0) * kDeg;

    const double lat = lat_deg * kDeg;
    const double cz = std::clamp(std::sin(lat) * std::sin(y.declination) +
                                     std::cos(lat) * std::cos(y.declination) * std::cos(hour_angle),
                                 -1.0, 1.0);
    SunPosition s;
    s.altitude = 90.0 - std::acos(cz) / kDeg;
    double az = std::atan2(std::sin(hour_angle),
                           std::cos(hour_angle) * std::sin(lat) - std::tan(y.declination) * std::cos(lat)) / kDeg +
                180.0;
    az = std::fmod(az, 360.0);
    if (az < 0) {
        az += 360.0;
    }
    s.azimuth = az;
    return s;
}

double daylight_duration(double lat_deg, const CivilDate& date) {
    if (!(std::abs(lat_deg) < 66.0)) {
        throw std::invalid_argument("daylight_duration: |latitude| must be below 66 degrees");
    }
    const double decl = year_terms(from_civil(date, 12)).declination;
    const double lat = lat_deg * kDeg;
    const double cos_h = std::cos((90.0 + kHorizonCorrectionDeg) * kDeg) / (std::cos(lat) * std::cos(decl)) -
                         std::tan(lat) * std::tan(decl);
    const double h = std::acos(std::clamp(cos_h, -1.0, 1.0)) / kDeg;
    return 8.0 * h; // 2 * h degrees at 4 minutes per degree
}

double irradiance(const SunPosition& sun, double cloud_attenuation) {
    if (sun.altitude <= 0) {
        return 0.0;
    }
    const double clear = std::max(0.0, std::sin(sun.altitude * kDeg)) * kClearSkyIrradiance;
    return clear * (1.0 - std::clamp(cloud_attenuation, 0.0, 1.0));
}

double panel_power(const PanelSpec& panel, double irradiance_w_m2) {
    return std::min(panel.rated_power, std::max(0.0, irradiance_w_m2) * panel.area_efficiency_product);
}

void sun_direction(const SunPosition& sun, double& dx, double& dy, double& dz) {
    const double alt = std::max(0.0, sun.altitude) * kDeg;
    const double az = sun.azimuth * kDeg;
    dx = std::sin(az) * std::cos(alt);
    dy = std::cos(az) * std::cos(alt);
    dz = std::sin(alt);
}

bool ray_hits_tree(double ox, double oy, double oz, double dx, double dy, double dz, const geo::TreeOccluder& tree) {
    const double px = ox - tree.center.x;
    const double py = oy - tree.center.y;
    const double a = dx * dx + dy * dy;
    const double b = 2.0 * (dx * px + dy * py);
    const double c = px * px + py * py - tree.canopy_radius * tree.canopy_radius;
    double lo;
    double hi;
    if (a == 0.0) {
        if (c > 0) {
            return false;
        }
        lo = -std::numeric_limits<double>::infinity();
        hi = std::numeric_limits<double>::infinity();
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0) {
            return false;
        }
        const double s = std::sqrt(disc);
        lo = (-b - s) / (2.0 * a);
        hi = (-b + s) / (2.0 * a);
    }
    lo = std::max(lo, 0.0);
    if (dz > 0) {
        hi = std::min(hi, (tree.height - oz) / dz);
    } else if (dz < 0) {
        lo = std::max(lo, (tree.height - oz) / dz);
    } else if (oz > tree.height) {
        return false;
    }
    return lo <= hi;
}

namespace {

double elevation_bound(double rise, double horizontal) {
    if (horizontal <= 0) {
        return 90.0;
    }
    return std::atan2(rise, horizontal) / kDeg;
}

// Slack keeps the prefilter conservative against rounding in atan2 versus the slab test.
constexpr double kElevationSlackDeg = 1e-6;

} // namespace

ShadeCaster::ShadeCaster(const geo::NodeSite& site, const OccluderSet& occluders)
    : origin_(site.position), height_(site.mount_height) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < occluders.buildings.size(); ++i) {
        const auto& b = occluders.buildings[i];
        if (b.height < height_) {
            continue; // a level or rising ray from the panel never dips below its start height
        }
        const double d = geo::distance_to_rect(origin_, b.footprint.bounds());
        order.emplace_back(elevation_bound(b.height - height_, d), i);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    boxes_.reserve(order.size());
    for (const auto& [e, i] : order) {
        const geo::Bounds r = occluders.buildings[i].footprint.bounds();
        boxes_.push_back(r.xmin, r.xmax, r.ymin, r.ymax, occluders.buildings[i].height);
        box_elevation_.push_back(e);
    }

    order.clear();
    for (std::size_t i = 0; i < occluders.trees.size(); ++i) {
        const auto& t = occluders.trees[i];
        if (t.height < height_) {
            continue;
        }
        const double d = std::max(0.0, geo::distance(origin_, t.center) - t.canopy_radius);
        order.emplace_back(elevation_bound(t.height - height_, d), i);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [e, i] : order) {
        trees_.push_back(occluders.trees[i]);
        tree_elevation_.push_back(e);
    }
}

std::size_t ShadeCaster::candidate_count(double altitude_deg) const {
    const double a = std::max(0.0, altitude_deg) - kElevationSlackDeg;
    const auto it = std::partition_point(box_elevation_.begin(), box_elevation_.end(),
                                         [a](double e) { return e >= a; });
    return std::size_t(it - box_elevation_.begin());
}

bool ShadeCaster::shaded(const SunPosition& sun) const {
    double dx;
    double dy;
    double dz;
    sun_direction(sun, dx, dy, dz);
    const double a = std::max(0.0, sun.altitude) - kElevationSlackDeg;

    const std::size_t nb = candidate_count(sun.altitude);
    if (nb > 0) {
        const simd::Ray ray{origin_.x, origin_.y, height_, dx, dy, dz, std::numeric_limits<double>::infinity()};
        if (simd::any_hit_kernel()(ray, simd::BoxView(boxes_).subview(0, nb))) {
            return true;
        }
    }
    for (std::size_t i = 0; i < trees_.size() && tree_elevation_[i] >= a; ++i) {
        if (ray_hits_tree(origin_.x, origin_.y, height_, dx, dy, dz, trees_[i])) {
            return true;
        }
    }
    return false;
}

bool is_shaded(const geo::NodeSite& site, const SunPosition& sun, const OccluderSet& occluders) {
    double dx;
    double dy;
    double dz;
    sun_direction(sun, dx, dy, dz);
    const double oz = site.mount_height;
    if (!occluders.buildings.empty()) {
        simd::BoxColumns cols;
        cols.reserve(occluders.buildings.size());
        for (const auto& b : occluders.buildings) {
            const geo::Bounds r = b.footprint.bounds();
            cols.push_back(r.xmin, r.xmax, r.ymin, r.ymax, b.height);
        }
        const simd::Ray ray{site.position.x, site.position.y, oz, dx, dy, dz,
                            std::numeric_limits<double>::infinity()};
        if (simd::any_hit_kernel()(ray, simd::BoxView(cols))) {
            return true;
        }
    }
    for (const auto& t : occluders.trees) {
        if (ray_hits_tree(site.position.x, site.position.y, oz, dx, dy, dz, t)) {
            return true;
        }
    }
    return false;
}

UnixMs local_day_start(const CivilDate& date, double lon_deg) {
    return from_civil(date) - UnixMs(std::llround(lon_deg / 15.0 * double(kMsPerHour)));
}

int shadow_minutes(double lat_deg, double lon_deg, const CivilDate& date, const ShadeCaster& caster) {
    const UnixMs start = local_day_start(date, lon_deg);
    int count = 0;
    for (int m = 0; m < 24 * 60; ++m) {
        const SunPosition sun = sun_position(lat_deg, lon_deg, start + m * kMsPerMinute);
        if (is_daytime(sun) && caster.shaded(sun)) {
            ++count;
        }
    }
    return count;
}

int shadow_minutes(double lat_deg, double lon_deg, const geo::NodeSite& site, const CivilDate& date,
                   const OccluderSet& occluders) {
    return shadow_minutes(lat_deg, lon_deg, date, ShadeCaster(site, occluders));
}

int daylight_minutes_sampled(double lat_deg, double lon_deg, const CivilDate& date) {
    const UnixMs start = local_day_start(date, lon_deg);
    int count = 0;
    for (int m = 0; m < 24 * 60; ++m) {
        if (is_daytime(sun_position(lat_deg, lon_deg, start + m * kMsPerMinute))) {
            ++count;
        }
    }
    return count;
}

} // namespace sensim::solar
