// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include "sensim/geo.hpp"
#include "sensim/time.hpp"

namespace sensim::solar {

/// Geometric (unrefracted) sun direction. Azimuth is clockwise from north.
struct SunPosition {
    double altitude = 0; // degrees, [-90, 90]
    double azimuth = 0;  // degrees, [0, 360)
};

/// Horizontal panel. area_efficiency_product converts W/m2 into electrical W.
struct PanelSpec {
    double rated_power = 6.0;
    double area_efficiency_product = 0.006;
};

/// Apparent lift of the sun's upper limb at the horizon (refraction plus semi-diameter).
inline constexpr double kHorizonCorrectionDeg = 0.833;
inline constexpr double kClearSkyIrradiance = 1000.0;

SunPosition sun_position(double lat_deg, double lon_deg, UnixMs t);

/// Declination in degrees from the fractional-year series.
double declination_deg(UnixMs t);

/// Minutes between refraction-corrected sunrise and sunset. Requires |lat| < 66.
double daylight_duration(double lat_deg, const CivilDate& date);

/// W/m2 on a horizontal surface: sin(altitude) * 1000 * (1 - cloud_attenuation), 0 at night.
double irradiance(const SunPosition& sun, double cloud_attenuation);

/// Electrical output of the panel, capped at its rating.
double panel_power(const PanelSpec& panel, double irradiance_w_m2);

/// Unit vector toward the sun with altitude clamped at 0 (x east, y north, z up).
void sun_direction(const SunPosition& sun, double& dx, double& dy, double& dz);

struct OccluderSet {
    std::span<const geo::Building> buildings;
    std::span<const geo::TreeOccluder> trees;
};

/// Ray from (x, y, z) along unit direction d against a vertical canopy cylinder.
bool ray_hits_tree(double ox, double oy, double oz, double dx, double dy, double dz, const geo::TreeOccluder& tree);

/// Per-site shading accelerator. Occluders are sorted by the steepest elevation at which
/// they could possibly cover the sun, so a query only scans the ones that can matter.
class ShadeCaster {
public:
    ShadeCaster() = default;
    ShadeCaster(const geo::NodeSite& site, const OccluderSet& occluders);

    /// Panel ray toward the sun hits any building volume or tree canopy.
    bool shaded(const SunPosition& sun) const;

    std::size_t candidate_count(double altitude_deg) const;

private:
    geo::GeoPoint origin_;
    double height_ = 0;
    simd::BoxColumns boxes_;
    std::vector<double> box_elevation_; // descending
    std::vector<geo::TreeOccluder> trees_;
    std::vector<double> tree_elevation_; // descending
};

/// Panel point is the site position at its mount height. Night (altitude <= 0) is treated
/// with the sun on the horizon.
bool is_shaded(const geo::NodeSite& site, const SunPosition& sun, const OccluderSet& occluders);

/// Start of the local mean-solar day containing civil `date` at longitude lon_deg.
UnixMs local_day_start(const CivilDate& date, double lon_deg);

/// True while the sun's upper limb is above the horizon.
inline bool is_daytime(const SunPosition& sun) { return sun.altitude > -kHorizonCorrectionDeg; }

/// Daytime minutes (1-minute sampling over the local solar day) during which the panel is shaded.
int shadow_minutes(double lat_deg, double lon_deg, const geo::NodeSite& site, const CivilDate& date,
                   const OccluderSet& occluders);
int shadow_minutes(double lat_deg, double lon_deg, const CivilDate& date, const ShadeCaster& caster);

/// Daytime minutes in the same sampling grid.
int daylight_minutes_sampled(double lat_deg, double lon_deg, const CivilDate& date);

} // namespace sensim::solar
