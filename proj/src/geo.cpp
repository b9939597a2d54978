// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "sensim/rng.hpp"

namespace sensim::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string make_id(const char* prefix, std::size_t n, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
    return buf;
}

} // namespace

bool Tower::in_outage(UnixMs t) const {
    // Windows are sorted by start and disjoint: only the last one starting at or before t can hold it.
    auto it = std::upper_bound(outages.begin(), outages.end(), t,
                               [](UnixMs v, const TimeWindow& w) { return v < w.start; });
    return it != outages.begin() && std::prev(it)->contains(t);
}

void sort_outages(Tower& tower) {
    std::sort(tower.outages.begin(), tower.outages.end(),
              [](const TimeWindow& a, const TimeWindow& b) { return a.start < b.start; });
}

std::string to_string(SelectionKind k) {
    switch (k) {
    case SelectionKind::Community:
        return "community";
    case SelectionKind::Epa:
        return "epa";
    default:
        return "random";
    }
}

std::optional<SelectionKind> parse_selection_kind(std::string_view s) {
    if (s == "random") {
        return SelectionKind::Random;
    }
    if (s == "community") {
        return SelectionKind::Community;
    }
    if (s == "epa") {
        return SelectionKind::Epa;
    }
    return std::nullopt;
}

std::string to_string(Archetype a) { return a == Archetype::Downtown ? "downtown" : "residential"; }

std::optional<Archetype> parse_archetype(std::string_view s) {
    if (s == "downtown") {
        return Archetype::Downtown;
    }
    if (s == "residential") {
        return Archetype::Residential;
    }
    return std::nullopt;
}

Bounds CityModel::extent() const {
    if (zones.empty()) {
        return {};
    }
    Bounds b = zones.front().cell;
    for (const auto& z : zones) {
        b.xmin = std::min(b.xmin, z.cell.xmin);
        b.ymin = std::min(b.ymin, z.cell.ymin);
        b.xmax = std::max(b.xmax, z.cell.xmax);
        b.ymax = std::max(b.ymax, z.cell.ymax);
    }
    return b;
}

const ZoneAttr* CityModel::find_zone(std::string_view id) const {
    for (const auto& z : zones) {
        if (z.id == id) {
            return &z;
        }
    }
    return nullptr;
}

const NodeSite* CityModel::find_site(std::string_view id) const {
    const auto i = site_index(id);
    return i ? &sites[*i] : nullptr;
}

const Tower* CityModel::find_tower(std::string_view id) const {
    const auto i = tower_index(id);
    return i ? &towers[*i] : nullptr;
}

std::optional<std::size_t> CityModel::site_index(std::string_view id) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> CityModel::tower_index(std::string_view id) const {
    for (std::size_t i = 0; i < towers.size(); ++i) {
        if (towers[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<std::string> validate(const CityModel& city) {
    std::vector<std::string> errors;
    auto finite = [](const GeoPoint& p) { return std::isfinite(p.x) && std::isfinite(p.y); };

    if (!(std::abs(city.origin_lat) <= 90.0) || !(std::abs(city.origin_lon) <= 180.0)) {
        errors.push_back("origin latitude/longitude out of range");
    }
    if (city.zones.empty()) {
        errors.push_back("city has no zones");
    }
    std::set<std::string> ids;
    auto unique = [&](const std::string& id, const char* what) {
        if (id.empty()) {
            errors.push_back(std::string(what) + " with empty id");
        } else if (!ids.insert(id).second) {
            errors.push_back("duplicate id '" + id + "'");
        }
    };
    double zone_area = 0;
    for (const auto& z : city.zones) {
        unique(z.id, "zone");
        if (!(z.cell.xmax > z.cell.xmin) || !(z.cell.ymax > z.cell.ymin)) {
            errors.push_back("zone '" + z.id + "' has an empty cell");
        }
        if (!(z.pct_minority >= 0.0 && z.pct_minority <= 1.0)) {
            errors.push_back("zone '" + z.id + "' pct_minority outside [0, 1]");
        }
        zone_area += z.cell.width() * z.cell.height();
    }
    for (std::size_t i = 0; i < city.zones.size(); ++i) {
        for (std::size_t j = i + 1; j < city.zones.size(); ++j) {
            const auto& a = city.zones[i].cell;
            const auto& b = city.zones[j].cell;
            const double ox = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
            const double oy = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
            if (ox > 1e-9 && oy > 1e-9) {
                errors.push_back("zones '" + city.zones[i].id + "' and '" + city.zones[j].id + "' overlap");
            }
        }
    }
    if (!city.zones.empty()) {
        const Bounds e = city.extent();
        const double extent_area = e.width() * e.height();
        if (std::abs(extent_area - zone_area) > 1e-6 * std::max(1.0, extent_area)) {
            errors.push_back("zone cells do not tile the city extent");
        }
    }
    for (const auto& b : city.buildings) {
        unique(b.id, "building");
        if (!finite(b.footprint.center) || !(b.footprint.width > 0) || !(b.footprint.depth > 0) ||
            !(b.height >= 0)) {
            errors.push_back("building '" + b.id + "' has invalid geometry");
        }
    }
    for (const auto& t : city.trees) {
        unique(t.id, "tree");
        if (!finite(t.center) || !(t.canopy_radius > 0) || !(t.height > 0)) {
            errors.push_back("tree '" + t.id + "' has invalid geometry");
        }
    }
    for (const auto& t : city.towers) {
        unique(t.id, "tower");
        if (!finite(t.position) || !(t.mast_height > 0) || !std::isfinite(t.tx_power)) {
            errors.push_back("tower '" + t.id + "' has invalid parameters");
        }
        auto windows = t.outages;
        std::sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (!(windows[i].start < windows[i].end)) {
                errors.push_back("tower '" + t.id + "' has an outage window with start >= end");
            }
            if (i > 0 && windows[i].start < windows[i - 1].end) {
                errors.push_back("tower '" + t.id + "' has overlapping outage windows");
            }
        }
    }
    for (const auto& s : city.sites) {
        unique(s.id, "site");
        if (!finite(s.position) || !(s.mount_height > 0)) {
            errors.push_back("site '" + s.id + "' has invalid geometry");
        }
        const ZoneAttr* z = city.find_zone(s.zone_id);
        if (z == nullptr) {
            errors.push_back("site '" + s.id + "' references unknown zone '" + s.zone_id + "'");
        } else if (!z->cell.contains(s.position)) {
            errors.push_back("site '" + s.id + "' lies outside its zone '" + s.zone_id + "'");
        }
    }
    return errors;
}

double distance(const GeoPoint& a, const GeoPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

GeoPoint LocalFrame::project(double lat, double lon) const {
    const double x = kEarthRadiusM * (lon - origin_lon) * kDegToRad * std::cos(origin_lat * kDegToRad);
    const double y = kEarthRadiusM * (lat - origin_lat) * kDegToRad;
    return {x, y};
}

void LocalFrame::unproject(const GeoPoint& p, double& lat, double& lon) const {
    lat = origin_lat + p.y / kEarthRadiusM / kDegToRad;
    lon = origin_lon + p.x / (kEarthRadiusM * std::cos(origin_lat * kDegToRad)) / kDegToRad;
}

double distance_to_rect(const GeoPoint& p, const Bounds& b) {
    const double dx = std::max({b.xmin - p.x, 0.0, p.x - b.xmax});
    const double dy = std::max({b.ymin - p.y, 0.0, p.y - b.ymax});
    return std::hypot(dx, dy);
}

BuildingStats building_stats(const NodeSite& site, std::span<const Building> buildings, double radius) {
    if (!(radius > 0)) {
        throw std::invalid_argument("building_stats: radius must be positive");
    }
    BuildingStats out;
    std::vector<double> heights;
    std::size_t closest = 0;
    double closest_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < buildings.size(); ++i) {
        const double d = distance(site.position, buildings[i].footprint.center);
        if (d > radius) {
            continue;
        }
        heights.push_back(buildings[i].height);
        if (d < closest_d || (d == closest_d && buildings[i].id < buildings[closest].id)) {
            closest_d = d;
            closest = i;
        }
    }
    out.count = int(heights.size());
    if (heights.empty()) {
        return out;
    }
    double sum = 0;
    for (double h : heights) {
        sum += h;
    }
    std::sort(heights.begin(), heights.end());
    out.tallest_height = heights.back();
    out.mean_height = sum / double(heights.size());
    out.median_height = heights[(heights.size() - 1) / 2];
    out.closest_distance = closest_d;
    out.closest_height = buildings[closest].height;
    return out;
}

BuildingIndex::BuildingIndex(std::span<const Building> buildings) {
    columns_.reserve(buildings.size());
    for (const auto& b : buildings) {
        const Bounds r = b.footprint.bounds();
        columns_.push_back(r.xmin, r.xmax, r.ymin, r.ymax, b.height);
    }
}

namespace {

LosResult resolve_los(const simd::Ray& ray, const simd::BoxView& view, std::vector<double>& scratch) {
    LosResult r;
    scratch.resize(view.count);
    simd::entry_kernel()(ray, view, scratch.data());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < view.count; ++i) {
        const double t = scratch[i];
        if (t == std::numeric_limits<double>::infinity()) {
            continue;
        }
        const double depth = view.top[i] - (ray.oz + ray.dz * t);
        r.max_obstruction_depth = std::max(r.max_obstruction_depth, depth);
        if (t < best) {
            best = t;
            r.blocker_index = i;
        }
    }
    r.blocked = r.blocker_index.has_value();
    return r;
}

simd::Ray segment_ray(const AntennaPoint& a, const AntennaPoint& b) {
    return {a.position.x, a.position.y, a.height, b.position.x - a.position.x, b.position.y - a.position.y,
            b.height - a.height, 1.0};
}

} // namespace

LosResult los_blocked(const AntennaPoint& node, const AntennaPoint& tower, const BuildingIndex& index) {
    thread_local std::vector<double> scratch;
    return resolve_los(segment_ray(node, tower), simd::BoxView(index.columns()), scratch);
}

LosResult los_blocked(const AntennaPoint& node, const AntennaPoint& tower, std::span<const Building> buildings) {
    return los_blocked(node, tower, BuildingIndex(buildings));
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Draft {
    Building building;
    bool feature = false;
};

void check_config(const GenConfig& c) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("generate_city: " + msg); };
    if (c.zone_cols <= 0 || c.zone_rows <= 0) {
        fail("config must define at least one zone");
    }
    if (!(c.extent_x > 0) || !(c.extent_y > 0)) {
        fail("extent must be positive");
    }
    if (c.random_sites < 0 || c.community_sites < 0 || c.epa_sites < 0) {
        fail("site counts must be non-negative");
    }
    if (c.random_sites + c.community_sites + c.epa_sites == 0) {
        fail("config must define at least one site");
    }
    if (c.canyon_sites < 0 || c.shadow_pocket_sites < 0 || c.tree_sites < 0) {
        fail("feature counts must be non-negative");
    }
    if (c.canyon_sites + c.shadow_pocket_sites + c.tree_sites > c.random_sites + c.community_sites) {
        fail("more feature sites than random + community sites");
    }
    if (!(c.tower_spacing > 0) || !(c.cell_size > 0) || !(c.mast_height > 0)) {
        fail("tower spacing, cell size and mast height must be positive");
    }
    if (!(c.disadvantaged_fraction >= 0 && c.disadvantaged_fraction <= 1)) {
        fail("disadvantaged_fraction must lie in [0, 1]");
    }
    const int nz = c.zone_cols * c.zone_rows;
    for (int z : c.downtown_zones) {
        if (z < 0 || z >= nz) {
            fail("downtown zone index out of range");
        }
    }
}

/// Weighted draw without replacement; returns positions into `candidates`.
std::vector<std::size_t> weighted_pick(Rng& rng, const std::vector<double>& weights, int count) {
    std::vector<std::size_t> picked;
    std::vector<double> w = weights;
    for (int k = 0; k < count; ++k) {
        double total = 0;
        for (double x : w) {
            total += x;
        }
        if (!(total > 0)) {
            break;
        }
        double r = uniform01(rng) * total;
        std::size_t chosen = w.size() - 1;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] <= 0) {
                continue;
            }
            if (r < w[i]) {
                chosen = i;
                break;
            }
            r -= w[i];
        }
        while (w[chosen] <= 0) {
            --chosen;
        }
        picked.push_back(chosen);
        w[chosen] = 0;
    }
    return picked;
}

double lognormal_height(Rng& rng, const ArchetypeSpec& a) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = a.height_median * std::exp(a.height_sigma * n(rng));
    return std::clamp(h, a.height_min, a.height_max);
}

class CityBuilder {
public:
    CityBuilder(const GenConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

    CityModel build() {
        city_.origin_lat = cfg_.origin_lat;
        city_.origin_lon = cfg_.origin_lon;
        make_zones();
        make_towers();
        make_sites();
        assign_features();
        make_background();
        clear_epa_surroundings();
        repair_line_of_sight();
        finalize_buildings();
        return std::move(city_);
    }

private:
    void make_zones() {
        Rng rng = substream(seed_, "zones");
        const int nz = cfg_.zone_cols * cfg_.zone_rows;
        const double w = cfg_.extent_x / cfg_.zone_cols;
        const double h = cfg_.extent_y / cfg_.zone_rows;
        std::vector<int> order(static_cast<std::size_t>(nz));
        for (int i = 0; i < nz; ++i) {
            order[std::size_t(i)] = i;
        }
        std::shuffle(order.begin(), order.end(), rng);
        const int n_dis = int(std::lround(cfg_.disadvantaged_fraction * nz));
        std::vector<bool> dis(std::size_t(nz), false);
        for (int i = 0; i < n_dis; ++i) {
            dis[std::size_t(order[std::size_t(i)])] = true;
        }
        for (int r = 0; r < cfg_.zone_rows; ++r) {
            for (int c = 0; c < cfg_.zone_cols; ++c) {
                const int idx = r * cfg_.zone_cols + c;
                ZoneAttr z;
                z.id = make_id("Z", std::size_t(idx), 2);
                // Last row/column snap to the exact extent so the cells tile it.
                z.cell = {c * w, r * h, c + 1 == cfg_.zone_cols ? cfg_.extent_x : (c + 1) * w,
                          r + 1 == cfg_.zone_rows ? cfg_.extent_y : (r + 1) * h};
                z.disadvantaged = dis[std::size_t(idx)];
                z.pct_minority = z.disadvantaged ? uniform(rng, 0.55, 0.95) : uniform(rng, 0.10, 0.60);
                z.archetype = std::find(cfg_.downtown_zones.begin(), cfg_.downtown_zones.end(), idx) !=
                                      cfg_.downtown_zones.end()
                                  ? Archetype::Downtown
                                  : Archetype::Residential;
                city_.zones.push_back(z);
            }
        }
    }

    void make_towers() {
        Rng rng = substream(seed_, "towers");
        const int nx = std::max(1, int(std::ceil(cfg_.extent_x / cfg_.tower_spacing)));
        const int ny = std::max(1, int(std::ceil(cfg_.extent_y / cfg_.tower_spacing)));
        const double sx = cfg_.extent_x / nx;
        const double sy = cfg_.extent_y / ny;
        std::size_t n = 0;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                Tower t;
                t.id = make_id("T", ++n, 3);
                const double jx = uniform(rng, -cfg_.tower_jitter, cfg_.tower_jitter) * sx;
                const double jy = uniform(rng, -cfg_.tower_jitter, cfg_.tower_jitter) * sy;
                t.position = {std::clamp((i + 0.5) * sx + jx, 1.0, cfg_.extent_x - 1.0),
                              std::clamp((j + 0.5) * sy + jy, 1.0, cfg_.extent_y - 1.0)};
                t.mast_height = cfg_.mast_height;
                t.tx_power = cfg_.tx_power;
                city_.towers.push_back(std::move(t));
            }
        }
    }

    bool placeable(const GeoPoint& p, double separation) const {
        for (const auto& t : city_.towers) {
            if (distance(p, t.position) < cfg_.min_site_tower_distance) {
                return false;
            }
        }
        for (const auto& s : city_.sites) {
            if (distance(p, s.position) < separation) {
                return false;
            }
        }
        return true;
    }

    void place_in_zone(Rng& rng, std::size_t zone, SelectionKind kind) {
        const ZoneAttr& z = city_.zones[zone];
        const double margin = std::min({60.0, z.cell.width() / 4, z.cell.height() / 4});
        double separation = cfg_.min_site_separation;
        for (int attempt = 0; attempt < 4000; ++attempt) {
            if (attempt > 0 && attempt % 1000 == 0) {
                separation /= 2;
            }
            const GeoPoint p{uniform(rng, z.cell.xmin + margin, z.cell.xmax - margin),
                             uniform(rng, z.cell.ymin + margin, z.cell.ymax - margin)};
            if (!placeable(p, separation)) {
                continue;
            }
            NodeSite s;
            s.id = make_id("S", city_.sites.size() + 1, 3);
            s.position = p;
            s.kind = kind;
            s.zone_id = z.id;
            city_.sites.push_back(std::move(s));
            return;
        }
        throw std::invalid_argument("generate_city: could not place a site in zone " + z.id);
    }

    void make_sites() {
        Rng rng = substream(seed_, "sites");
        const std::size_t nz = city_.zones.size();

        // Stratified: every zone gets floor(n / zones); the remainder goes to distinct random zones.
        std::vector<int> quota(nz, cfg_.random_sites / int(nz));
        std::vector<std::size_t> order(nz);
        for (std::size_t i = 0; i < nz; ++i) {
            order[i] = i;
        }
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < cfg_.random_sites % int(nz); ++i) {
            ++quota[order[std::size_t(i)]];
        }
        for (std::size_t z = 0; z < nz; ++z) {
            for (int k = 0; k < quota[z]; ++k) {
                place_in_zone(rng, z, SelectionKind::Random);
            }
        }

        std::vector<double> community_w(nz);
        for (std::size_t z = 0; z < nz; ++z) {
            community_w[z] = city_.zones[z].disadvantaged ? cfg_.community_disadvantaged_weight : 1.0;
        }
        std::discrete_distribution<std::size_t> community_zone(community_w.begin(), community_w.end());
        for (int k = 0; k < cfg_.community_sites; ++k) {
            place_in_zone(rng, community_zone(rng), SelectionKind::Community);
        }
        std::uniform_int_distribution<std::size_t> any_zone(0, nz - 1);
        for (int k = 0; k < cfg_.epa_sites; ++k) {
            place_in_zone(rng, any_zone(rng), SelectionKind::Epa);
        }
        site_roles_.assign(city_.sites.size(), Role::Plain);
    }

    enum class Role { Plain, Canyon, Pocket, Tree };

    bool zone_disadvantaged(const NodeSite& s) const {
        const ZoneAttr* z = city_.find_zone(s.zone_id);
        return z != nullptr && z->disadvantaged;
    }

    void pick_role(Rng& rng, Role role, int count, double dis_weight) {
        std::vector<std::size_t> eligible;
        std::vector<double> weights;
        for (std::size_t i = 0; i < city_.sites.size(); ++i) {
            if (city_.sites[i].kind == SelectionKind::Epa || site_roles_[i] != Role::Plain) {
                continue;
            }
            eligible.push_back(i);
            weights.push_back(zone_disadvantaged(city_.sites[i]) ? dis_weight : 1.0);
        }
        for (std::size_t k : weighted_pick(rng, weights, count)) {
            site_roles_[eligible[k]] = role;
        }
    }

    void add_feature(double x0, double x1, double y0, double y1, double height) {
        Draft d;
        d.building.footprint = {{(x0 + x1) / 2, (y0 + y1) / 2}, x1 - x0, y1 - y0};
        d.building.height = height;
        d.feature = true;
        drafts_.push_back(std::move(d));
    }

    void assign_features() {
        Rng rng = substream(seed_, "features");
        pick_role(rng, Role::Canyon, cfg_.canyon_sites, cfg_.canyon_disadvantaged_weight);
        pick_role(rng, Role::Pocket, cfg_.shadow_pocket_sites, cfg_.shadow_disadvantaged_weight);
        pick_role(rng, Role::Tree, cfg_.tree_sites, 1.0);

        constexpr double thickness = 12.0;
        for (std::size_t i = 0; i < city_.sites.size(); ++i) {
            const GeoPoint p = city_.sites[i].position;
            switch (site_roles_[i]) {
            case Role::Canyon: {
                const double g = uniform(rng, cfg_.canyon_gap.lo, cfg_.canyon_gap.hi);
                const double reach = g + thickness;
                add_feature(p.x - reach, p.x + reach, p.y + g, p.y + reach, uniform(rng, cfg_.canyon_height.lo, cfg_.canyon_height.hi));
                add_feature(p.x - reach, p.x + reach, p.y - reach, p.y - g, uniform(rng, cfg_.canyon_height.lo, cfg_.canyon_height.hi));
                add_feature(p.x + g, p.x + reach, p.y - g, p.y + g, uniform(rng, cfg_.canyon_height.lo, cfg_.canyon_height.hi));
                add_feature(p.x - reach, p.x - g, p.y - g, p.y + g, uniform(rng, cfg_.canyon_height.lo, cfg_.canyon_height.hi));
                break;
            }
            case Role::Pocket: {
                const double d = uniform(rng, cfg_.pocket_distance.lo, cfg_.pocket_distance.hi);
                const double w = uniform(rng, cfg_.pocket_width.lo, cfg_.pocket_width.hi);
                const double e = uniform(rng, cfg_.pocket_elevation_deg.lo, cfg_.pocket_elevation_deg.hi);
                const double h = city_.sites[i].mount_height + d * std::tan(e * std::numbers::pi / 180.0);
                add_feature(p.x - w / 2, p.x + w / 2, p.y - d - 15.0, p.y - d, h);
                break;
            }
            case Role::Tree: {
                TreeOccluder t;
                const double d = uniform(rng, cfg_.tree_distance.lo, cfg_.tree_distance.hi);
                t.canopy_radius = uniform(rng, cfg_.tree_radius.lo, cfg_.tree_radius.hi);
                t.height = uniform(rng, cfg_.tree_height.lo, cfg_.tree_height.hi);
                t.center = {p.x + uniform(rng, -1.0, 1.0), p.y - d - t.canopy_radius};
                t.id = make_id("R", city_.trees.size() + 1, 4);
                city_.trees.push_back(std::move(t));
                break;
            }
            default:
                break;
            }
        }
    }

    const ArchetypeSpec& archetype_at(const GeoPoint& p) const {
        for (const auto& z : city_.zones) {
            if (z.cell.contains(p)) {
                return z.archetype == Archetype::Downtown ? cfg_.downtown : cfg_.residential;
            }
        }
        return cfg_.residential;
    }

    void make_background() {
        const double cs = cfg_.cell_size;
        const int ncx = int(std::ceil(cfg_.extent_x / cs));
        const int ncy = int(std::ceil(cfg_.extent_y / cs));
        std::set<std::pair<int, int>> cells;
        for (const auto& s : city_.sites) {
            const int r = int(std::ceil(cfg_.building_radius / cs)) + 1;
            const int cx = int(s.position.x / cs);
            const int cy = int(s.position.y / cs);
            for (int iy = std::max(0, cy - r); iy <= std::min(ncy - 1, cy + r); ++iy) {
                for (int ix = std::max(0, cx - r); ix <= std::min(ncx - 1, cx + r); ++ix) {
                    const GeoPoint c{(ix + 0.5) * cs, (iy + 0.5) * cs};
                    if (distance(c, s.position) <= cfg_.building_radius) {
                        cells.emplace(iy, ix);
                    }
                }
            }
        }
        for (const auto& [iy, ix] : cells) {
            Rng rng = substream(seed_, "cell", std::uint64_t(iy) * 100003ULL + std::uint64_t(ix));
            const GeoPoint cc{(ix + 0.5) * cs, (iy + 0.5) * cs};
            const ArchetypeSpec& a = archetype_at(cc);
            std::poisson_distribution<int> count(a.density_per_km2 * cs * cs / 1e6);
            const int n = count(rng);
            for (int k = 0; k < n; ++k) {
                Draft d;
                const double w = uniform(rng, a.footprint_min, a.footprint_max);
                const double dp = uniform(rng, a.footprint_min, a.footprint_max);
                const GeoPoint c{uniform(rng, ix * cs, (ix + 1) * cs), uniform(rng, iy * cs, (iy + 1) * cs)};
                d.building.footprint = {c, w, dp};
                d.building.height = lognormal_height(rng, a);
                if (acceptable_background(d.building)) {
                    drafts_.push_back(std::move(d));
                }
            }
        }
    }

    bool acceptable_background(const Building& b) const {
        const Bounds r = b.footprint.bounds();
        if (r.xmin < 0 || r.ymin < 0 || r.xmax > cfg_.extent_x || r.ymax > cfg_.extent_y) {
            return false;
        }
        for (const auto& s : city_.sites) {
            if (distance_to_rect(s.position, r) < cfg_.site_clearance) {
                return false;
            }
        }
        for (const auto& t : city_.towers) {
            if (distance_to_rect(t.position, r) < 5.0) {
                return false;
            }
        }
        for (const auto& t : city_.trees) {
            if (distance_to_rect(t.center, r) < t.canopy_radius) {
                return false;
            }
        }
        return true;
    }

    void clear_epa_surroundings() {
        const double max_slope = std::tan(cfg_.epa_max_elevation_deg * kDegToRad);
        for (const auto& s : city_.sites) {
            if (s.kind != SelectionKind::Epa) {
                continue;
            }
            for (auto& d : drafts_) {
                if (d.feature) {
                    continue;
                }
                const double dist = distance_to_rect(s.position, d.building.footprint.bounds());
                if (dist < cfg_.epa_clear_radius ||
                    (d.building.height - s.mount_height) > max_slope * std::max(dist, 1e-9)) {
                    d.building.height = -1; // marks removal
                }
            }
        }
        std::erase_if(drafts_, [](const Draft& d) { return d.building.height < 0; });
    }

    void repair_line_of_sight() {
        simd::BoxColumns cols;
        cols.reserve(drafts_.size());
        for (const auto& d : drafts_) {
            const Bounds r = d.building.footprint.bounds();
            cols.push_back(r.xmin, r.xmax, r.ymin, r.ymax, d.building.height);
        }
        std::vector<double> scratch(cols.size());
        const auto kernel = simd::entry_kernel();
        const double removed = -std::numeric_limits<double>::infinity();

        for (std::size_t si = 0; si < city_.sites.size(); ++si) {
            if (site_roles_[si] == Role::Canyon) {
                continue;
            }
            const NodeSite& s = city_.sites[si];
            std::vector<std::pair<double, std::size_t>> near;
            for (std::size_t ti = 0; ti < city_.towers.size(); ++ti) {
                const double d = distance(s.position, city_.towers[ti].position);
                if (d <= cfg_.los_repair_radius) {
                    near.emplace_back(d, ti);
                }
            }
            std::sort(near.begin(), near.end());
            for (const auto& [d, ti] : near) {
                const Tower& t = city_.towers[ti];
                const simd::Ray ray{s.position.x, s.position.y, s.mount_height, t.position.x - s.position.x,
                                    t.position.y - s.position.y, t.mast_height - s.mount_height, 1.0};
                bool clear = false;
                for (;;) {
                    kernel(ray, simd::BoxView(cols), scratch.data());
                    std::size_t first = cols.size();
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < cols.size(); ++i) {
                        if (scratch[i] < best) {
                            best = scratch[i];
                            first = i;
                        }
                    }
                    if (first == cols.size()) {
                        clear = true;
                        break;
                    }
                    if (drafts_[first].feature) {
                        break;
                    }
                    cols.top[first] = removed;
                    drafts_[first].building.height = -1;
                }
                if (clear) {
                    break;
                }
            }
        }
        std::erase_if(drafts_, [](const Draft& d) { return d.building.height < 0; });
    }

    void finalize_buildings() {
        city_.buildings.reserve(drafts_.size());
        std::size_t n = 0;
        for (auto& d : drafts_) {
            d.building.id = make_id("B", ++n, 6);
            city_.buildings.push_back(std::move(d.building));
        }
    }

    const GenConfig& cfg_;
    std::uint64_t seed_;
    CityModel city_;
    std::vector<Role> site_roles_;
    std::vector<Draft> drafts_;
};

} // namespace

CityModel generate_city(const GenConfig& config, std::uint64_t seed) {
    check_config(config);
    return CityBuilder(config, seed).build();
}

} // namespace sensim::geo
