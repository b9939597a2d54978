// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/geo_json.hpp"

#include <fstream>
#include <stdexcept>

namespace sensim::geo {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ArchetypeSpec, density_per_km2, footprint_min, footprint_max,
                                                height_median, height_sigma, height_min, height_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FeatureRange, lo, hi)

namespace {

json bounds_json(const Bounds& b) { return {{"xmin", b.xmin}, {"ymin", b.ymin}, {"xmax", b.xmax}, {"ymax", b.ymax}}; }

Bounds bounds_from(const json& j) {
    return {j.at("xmin").get<double>(), j.at("ymin").get<double>(), j.at("xmax").get<double>(),
            j.at("ymax").get<double>()};
}

TimeWindow window_from(const json& j) {
    const auto s = parse_iso8601(j.at("start").get<std::string>());
    const auto e = parse_iso8601(j.at("end").get<std::string>());
    if (!s || !e) {
        throw std::runtime_error("invalid outage timestamp");
    }
    return {*s, *e};
}

} // namespace

void to_json(json& j, const CityModel& c) {
    j = json::object();
    j["origin_lat"] = c.origin_lat;
    j["origin_lon"] = c.origin_lon;
    json zones = json::array();
    for (const auto& z : c.zones) {
        zones.push_back({{"id", z.id},
                         {"cell", bounds_json(z.cell)},
                         {"pct_minority", z.pct_minority},
                         {"disadvantaged", z.disadvantaged},
                         {"archetype", to_string(z.archetype)}});
    }
    j["zones"] = std::move(zones);
    json buildings = json::array();
    for (const auto& b : c.buildings) {
        buildings.push_back({{"id", b.id},
                             {"x", b.footprint.center.x},
                             {"y", b.footprint.center.y},
                             {"width", b.footprint.width},
                             {"depth", b.footprint.depth},
                             {"height", b.height}});
    }
    j["buildings"] = std::move(buildings);
    json trees = json::array();
    for (const auto& t : c.trees) {
        trees.push_back({{"id", t.id},
                         {"x", t.center.x},
                         {"y", t.center.y},
                         {"canopy_radius", t.canopy_radius},
                         {"height", t.height}});
    }
    j["trees"] = std::move(trees);
    json towers = json::array();
    for (const auto& t : c.towers) {
        json outages = json::array();
        for (const auto& w : t.outages) {
            outages.push_back({{"start", to_iso8601(w.start)}, {"end", to_iso8601(w.end)}});
        }
        towers.push_back({{"id", t.id},
                          {"x", t.position.x},
                          {"y", t.position.y},
                          {"mast_height", t.mast_height},
                          {"tx_power", t.tx_power},
                          {"outages", std::move(outages)}});
    }
    j["towers"] = std::move(towers);
    json sites = json::array();
    for (const auto& s : c.sites) {
        sites.push_back({{"id", s.id},
                         {"x", s.position.x},
                         {"y", s.position.y},
                         {"mount_height", s.mount_height},
                         {"kind", to_string(s.kind)},
                         {"zone_id", s.zone_id}});
    }
    j["sites"] = std::move(sites);
}

void from_json(const json& j, CityModel& c) {
    c = CityModel{};
    c.origin_lat = j.at("origin_lat").get<double>();
    c.origin_lon = j.at("origin_lon").get<double>();
    for (const auto& z : j.at("zones")) {
        ZoneAttr a;
        a.id = z.at("id").get<std::string>();
        a.cell = bounds_from(z.at("cell"));
        a.pct_minority = z.at("pct_minority").get<double>();
        a.disadvantaged = z.at("disadvantaged").get<bool>();
        const auto arch = parse_archetype(z.value("archetype", std::string("residential")));
        if (!arch) {
            throw std::runtime_error("zone '" + a.id + "' has an unknown archetype");
        }
        a.archetype = *arch;
        c.zones.push_back(std::move(a));
    }
    for (const auto& b : j.value("buildings", json::array())) {
        Building x;
        x.id = b.at("id").get<std::string>();
        x.footprint = {{b.at("x").get<double>(), b.at("y").get<double>()}, b.at("width").get<double>(),
                       b.at("depth").get<double>()};
        x.height = b.at("height").get<double>();
        c.buildings.push_back(std::move(x));
    }
    for (const auto& t : j.value("trees", json::array())) {
        TreeOccluder x;
        x.id = t.at("id").get<std::string>();
        x.center = {t.at("x").get<double>(), t.at("y").get<double>()};
        x.canopy_radius = t.at("canopy_radius").get<double>();
        x.height = t.at("height").get<double>();
        c.trees.push_back(std::move(x));
    }
    for (const auto& t : j.at("towers")) {
        Tower x;
        x.id = t.at("id").get<std::string>();
        x.position = {t.at("x").get<double>(), t.at("y").get<double>()};
        x.mast_height = t.value("mast_height", 30.0);
        x.tx_power = t.value("tx_power", 43.0);
        for (const auto& w : t.value("outages", json::array())) {
            x.outages.push_back(window_from(w));
        }
        sort_outages(x);
        c.towers.push_back(std::move(x));
    }
    for (const auto& s : j.at("sites")) {
        NodeSite x;
        x.id = s.at("id").get<std::string>();
        x.position = {s.at("x").get<double>(), s.at("y").get<double>()};
        x.mount_height = s.value("mount_height", 2.5);
        const auto kind = parse_selection_kind(s.value("kind", std::string("random")));
        if (!kind) {
            throw std::runtime_error("site '" + x.id + "' has an unknown selection kind");
        }
        x.kind = *kind;
        x.zone_id = s.at("zone_id").get<std::string>();
        c.sites.push_back(std::move(x));
    }
}

void to_json(json& j, const GenConfig& c) {
    j = json{{"origin_lat", c.origin_lat},
             {"origin_lon", c.origin_lon},
             {"extent_x", c.extent_x},
             {"extent_y", c.extent_y},
             {"zone_cols", c.zone_cols},
             {"zone_rows", c.zone_rows},
             {"downtown_zones", c.downtown_zones},
             {"disadvantaged_fraction", c.disadvantaged_fraction},
             {"residential", c.residential},
             {"downtown", c.downtown},
             {"building_radius", c.building_radius},
             {"cell_size", c.cell_size},
             {"site_clearance", c.site_clearance},
             {"tower_spacing", c.tower_spacing},
             {"tower_jitter", c.tower_jitter},
             {"mast_height", c.mast_height},
             {"tx_power", c.tx_power},
             {"min_site_tower_distance", c.min_site_tower_distance},
             {"min_site_separation", c.min_site_separation},
             {"random_sites", c.random_sites},
             {"community_sites", c.community_sites},
             {"epa_sites", c.epa_sites},
             {"community_disadvantaged_weight", c.community_disadvantaged_weight},
             {"canyon_sites", c.canyon_sites},
             {"canyon_disadvantaged_weight", c.canyon_disadvantaged_weight},
             {"canyon_height", c.canyon_height},
             {"canyon_gap", c.canyon_gap},
             {"shadow_pocket_sites", c.shadow_pocket_sites},
             {"shadow_disadvantaged_weight", c.shadow_disadvantaged_weight},
             {"pocket_elevation_deg", c.pocket_elevation_deg},
             {"pocket_distance", c.pocket_distance},
             {"pocket_width", c.pocket_width},
             {"tree_sites", c.tree_sites},
             {"tree_radius", c.tree_radius},
             {"tree_height", c.tree_height},
             {"tree_distance", c.tree_distance},
             {"epa_clear_radius", c.epa_clear_radius},
             {"epa_max_elevation_deg", c.epa_max_elevation_deg},
             {"los_repair_radius", c.los_repair_radius}};
}

void from_json(const json& j, GenConfig& c) {
    static const json known = json(GenConfig{});
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            throw std::runtime_error("unknown city config key '" + key + "'");
        }
    }
    const GenConfig d;
    c.origin_lat = j.value("origin_lat", d.origin_lat);
    c.origin_lon = j.value("origin_lon", d.origin_lon);
    c.extent_x = j.value("extent_x", d.extent_x);
    c.extent_y = j.value("extent_y", d.extent_y);
    c.zone_cols = j.value("zone_cols", d.zone_cols);
    c.zone_rows = j.value("zone_rows", d.zone_rows);
    c.downtown_zones = j.value("downtown_zones", d.downtown_zones);
    c.disadvantaged_fraction = j.value("disadvantaged_fraction", d.disadvantaged_fraction);
    c.residential = j.value("residential", d.residential);
    c.downtown = j.value("downtown", d.downtown);
    c.building_radius = j.value("building_radius", d.building_radius);
    c.cell_size = j.value("cell_size", d.cell_size);
    c.site_clearance = j.value("site_clearance", d.site_clearance);
    c.tower_spacing = j.value("tower_spacing", d.tower_spacing);
    c.tower_jitter = j.value("tower_jitter", d.tower_jitter);
    c.mast_height = j.value("mast_height", d.mast_height);
    c.tx_power = j.value("tx_power", d.tx_power);
    c.min_site_tower_distance = j.value("min_site_tower_distance", d.min_site_tower_distance);
    c.min_site_separation = j.value("min_site_separation", d.min_site_separation);
    c.random_sites = j.value("random_sites", d.random_sites);
    c.community_sites = j.value("community_sites", d.community_sites);
    c.epa_sites = j.value("epa_sites", d.epa_sites);
    c.community_disadvantaged_weight = j.value("community_disadvantaged_weight", d.community_disadvantaged_weight);
    c.canyon_sites = j.value("canyon_sites", d.canyon_sites);
    c.canyon_disadvantaged_weight = j.value("canyon_disadvantaged_weight", d.canyon_disadvantaged_weight);
    c.canyon_height = j.value("canyon_height", d.canyon_height);
    c.canyon_gap = j.value("canyon_gap", d.canyon_gap);
    c.shadow_pocket_sites = j.value("shadow_pocket_sites", d.shadow_pocket_sites);
    c.shadow_disadvantaged_weight = j.value("shadow_disadvantaged_weight", d.shadow_disadvantaged_weight);
    c.pocket_elevation_deg = j.value("pocket_elevation_deg", d.pocket_elevation_deg);
    c.pocket_distance = j.value("pocket_distance", d.pocket_distance);
    c.pocket_width = j.value("pocket_width", d.pocket_width);
    c.tree_sites = j.value("tree_sites", d.tree_sites);
    c.tree_radius = j.value("tree_radius", d.tree_radius);
    c.tree_height = j.value("tree_height", d.tree_height);
    c.tree_distance = j.value("tree_distance", d.tree_distance);
    c.epa_clear_radius = j.value("epa_clear_radius", d.epa_clear_radius);
    c.epa_max_elevation_deg = j.value("epa_max_elevation_deg", d.epa_max_elevation_deg);
    c.los_repair_radius = j.value("los_repair_radius", d.los_repair_radius);
}

CityModel load_city(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open city file '" + path + "'");
    }
    CityModel city;
    try {
        city = json::parse(in).get<CityModel>();
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed city file '" + path + "': " + e.what());
    }
    const auto errors = validate(city);
    if (!errors.empty()) {
        throw std::runtime_error("invalid city file '" + path + "': " + errors.front());
    }
    return city;
}

void save_city(const CityModel& city, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write city file '" + path + "'");
    }
    out << json(city).dump(1) << '\n';
}

} // namespace sensim::geo
