// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sensim/simd/occlusion.hpp"
#include "sensim/time.hpp"

namespace sensim::geo {

/// Meters east (x) and north (y) of the city origin.
struct GeoPoint {
    double x = 0;
    double y = 0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Bounds {
    double xmin = 0;
    double ymin = 0;
    double xmax = 0;
    double ymax = 0;

    bool contains(const GeoPoint& p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    GeoPoint center() const { return {(xmin + xmax) / 2, (ymin + ymax) / 2}; }
    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Axis-aligned footprint; width runs along x, depth along y.
struct Rect {
    GeoPoint center;
    double width = 0;
    double depth = 0;

    Bounds bounds() const {
        return {center.x - width / 2, center.y - depth / 2, center.x + width / 2, center.y + depth / 2};
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Building {
    std::string id;
    Rect footprint;
    double height = 0;

    friend bool operator==(const Building&, const Building&) = default;
};

/// Canopy modeled as a vertical cylinder from the ground to `height`.
struct TreeOccluder {
    std::string id;
    GeoPoint center;
    double canopy_radius = 0;
    double height = 0;

    friend bool operator==(const TreeOccluder&, const TreeOccluder&) = default;
};

struct Tower {
    std::string id;
    GeoPoint position;
    double mast_height = 30.0; // assumption: not reported for the deployment
    double tx_power = 43.0;    // dBm, assumption
    std::vector<TimeWindow> outages; // sorted by start, disjoint

    bool in_outage(UnixMs t) const;
    friend bool operator==(const Tower&, const Tower&) = default;
};

void sort_outages(Tower& tower);

enum class Archetype { Residential, Downtown };

struct ZoneAttr {
    std::string id;
    Bounds cell;
    double pct_minority = 0; // fraction in [0, 1]
    bool disadvantaged = false;
    Archetype archetype = Archetype::Residential;

    bool majority_minority() const { return pct_minority > 0.5; }
    friend bool operator==(const ZoneAttr&, const ZoneAttr&) = default;
};

enum class SelectionKind { Random, Community, Epa };

std::string to_string(SelectionKind k);
std::optional<SelectionKind> parse_selection_kind(std::string_view s);
std::string to_string(Archetype a);
std::optional<Archetype> parse_archetype(std::string_view s);

struct NodeSite {
    std::string id;
    GeoPoint position;
    double mount_height = 2.5;
    SelectionKind kind = SelectionKind::Random;
    std::string zone_id;

    friend bool operator==(const NodeSite&, const NodeSite&) = default;
};

struct CityModel {
    double origin_lat = 41.88;
    double origin_lon = -87.63;
    std::vector<ZoneAttr> zones;
    std::vector<Building> buildings;
    std::vector<TreeOccluder> trees;
    std::vector<Tower> towers;
    std::vector<NodeSite> sites;

    /// Union of zone cells.
    Bounds extent() const;
    const ZoneAttr* find_zone(std::string_view id) const;
    const NodeSite* find_site(std::string_view id) const;
    const Tower* find_tower(std::string_view id) const;
    std::optional<std::size_t> site_index(std::string_view id) const;
    std::optional<std::size_t> tower_index(std::string_view id) const;

    friend bool operator==(const CityModel&, const CityModel&) = default;
};

/// Returns one message per violated invariant; empty when the model is valid.
std::vector<std::string> validate(const CityModel& city);

// ---------------------------------------------------------------------------
// Geometry

double distance(const GeoPoint& a, const GeoPoint& b);

inline constexpr double kEarthRadiusM = 6371008.8;

/// Equirectangular projection about (origin_lat, origin_lon).
struct LocalFrame {
    double origin_lat = 0;
    double origin_lon = 0;

    GeoPoint project(double lat, double lon) const;
    void unproject(const GeoPoint& p, double& lat, double& lon) const;
};

inline LocalFrame frame_of(const CityModel& c) { return {c.origin_lat, c.origin_lon}; }

/// Distance from p to the closest point of the rectangle (0 if inside).
double distance_to_rect(const GeoPoint& p, const Bounds& b);

struct BuildingStats {
    int count = 0;
    std::optional<double> tallest_height;
    std::optional<double> mean_height;
    std::optional<double> median_height; // lower of the two middles for even counts
    std::optional<double> closest_distance;
    std::optional<double> closest_height;
};

/// Statistics over buildings whose footprint center lies within `radius` of the site.
/// Throws std::invalid_argument when radius <= 0.
BuildingStats building_stats(const NodeSite& site, std::span<const Building> buildings, double radius);

/// Column layout of building volumes for the occlusion kernels. Index i mirrors buildings[i].
class BuildingIndex {
public:
    BuildingIndex() = default;
    explicit BuildingIndex(std::span<const Building> buildings);

    const simd::BoxColumns& columns() const { return columns_; }
    std::size_t size() const { return columns_.size(); }

private:
    simd::BoxColumns columns_;
};

struct LosResult {
    bool blocked = false;
    std::optional<std::size_t> blocker_index; // first blocker by crossing order, ties to lowest index
    /// Largest amount by which a blocking building rises above the segment at its entry point (m).
    double max_obstruction_depth = 0;
};

struct AntennaPoint {
    GeoPoint position;
    double height = 0;
};

/// Blocked iff the straight 3-D segment between the antennas enters any building volume.
LosResult los_blocked(const AntennaPoint& node, const AntennaPoint& tower, const BuildingIndex& index);
LosResult los_blocked(const AntennaPoint& node, const AntennaPoint& tower, std::span<const Building> buildings);

// ---------------------------------------------------------------------------
// Procedural generation

struct ArchetypeSpec {
    double density_per_km2 = 180;
    double footprint_min = 10;
    double footprint_max = 25;
    double height_median = 8;
    double height_sigma = 0.35; // lognormal shape
    double height_min = 3;
    double height_max = 40;
};

struct FeatureRange {
    double lo = 0;
    double hi = 0;
};

struct GenConfig {
    double origin_lat = 41.88;
    double origin_lon = -87.63;
    double extent_x = 12000;
    double extent_y = 18000;
    int zone_cols = 4;
    int zone_rows = 6;
    std::vector<int> downtown_zones;      // zone indices, row-major from the south-west corner
    double disadvantaged_fraction = 0.4;  // share of zones flagged disadvantaged
    ArchetypeSpec residential;
    ArchetypeSpec downtown{600, 15, 45, 35, 0.6, 6, 220};

    double building_radius = 600; // buildings are only generated near sites
    double cell_size = 100;
    double site_clearance = 6;

    double tower_spacing = 2000;
    double tower_jitter = 0.35; // fraction of spacing
    double mast_height = 30;
    double tx_power = 43;
    double min_site_tower_distance = 200;
    double min_site_separation = 150;

    int random_sites = 86;
    int community_sites = 20;
    int epa_sites = 12;
    double community_disadvantaged_weight = 3.0;

    // Walled-in sites: four tall walls close around the site.
    int canyon_sites = 0;
    double canyon_disadvantaged_weight = 3.0;
    FeatureRange canyon_height{18, 32};
    FeatureRange canyon_gap{8, 14};

    // A long wall a few meters south of the site. Its top sits at pocket_elevation_deg as
    // seen from the panel, so the panel loses direct sun whenever the sun stays below that.
    int shadow_pocket_sites = 0;
    double shadow_disadvantaged_weight = 2.0;
    FeatureRange pocket_elevation_deg{25, 31};
    FeatureRange pocket_distance{4, 9};
    FeatureRange pocket_width{60, 110};

    int tree_sites = 0;
    FeatureRange tree_radius{3, 6};
    FeatureRange tree_height{8, 15};
    FeatureRange tree_distance{3, 7};

    double epa_clear_radius = 80;
    double epa_max_elevation_deg = 8;
    double los_repair_radius = 4000;
};

/// Deterministic for a given (config, seed). Throws std::invalid_argument on invalid configs.
CityModel generate_city(const GenConfig& config, std::uint64_t seed);

} // namespace sensim::geo
