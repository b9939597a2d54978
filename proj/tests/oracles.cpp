// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRad = kPi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Clips [lo, hi] against o + t*d lying within [a, b] on one axis.
bool clip_axis(double o, double d, double a, double b, double& lo, double& hi) {
    if (d == 0.0) {
        return o >= a && o <= b;
    }
    double t0 = (a - o) / d;
    double t1 = (b - o) / d;
    if (t0 > t1) {
        std::swap(t0, t1);
    }
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    return lo <= hi;
}

} // namespace

double haversine(double lat1, double lon1, double lat2, double lon2) {
    const double r = 6371008.8;
    const double p1 = lat1 * kRad;
    const double p2 = lat2 * kRad;
    const double dp = (lat2 - lat1) * kRad;
    const double dl = (lon2 - lon1) * kRad;
    const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

SampledLos sampled_los(const sensim::geo::AntennaPoint& a, const sensim::geo::AntennaPoint& b,
                       std::span<const sensim::geo::Building> buildings, double step_m) {
    const double dx = b.position.x - a.position.x;
    const double dy = b.position.y - a.position.y;
    const double dz = b.height - a.height;
    const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
    const auto n = std::int64_t(std::ceil(len / step_m));
    const double dt = n == 0 ? 0.0 : 1.0 / double(n);
    // Inside building i's volume grown by `margin` on every side.
    const auto inside = [&](std::size_t i, double t, double margin) {
        const auto& f = buildings[i].footprint;
        const double x = a.position.x + t * dx;
        const double y = a.position.y + t * dy;
        const double z = a.height + t * dz;
        return std::abs(x - f.center.x) <= f.width / 2 + margin && std::abs(y - f.center.y) <= f.depth / 2 + margin &&
               z >= -margin && z <= buildings[i].height + margin;
    };
    for (std::int64_t k = 0; k <= n; ++k) {
        const double t = double(k) * dt;
        std::optional<std::size_t> hit;
        double hit_t = kInf;
        for (std::size_t i = 0; i < buildings.size(); ++i) {
            if (inside(i, t, 0.0)) {
                if (t < hit_t) {
                    hit = i;
                    hit_t = t;
                }
                continue;
            }
            // Any crossing shorter than a step passes within half a step of this sample; walk
            // the two neighboring steps ten thousand times finer.
            if (!inside(i, t, step_m)) {
                continue;
            }
            constexpr int kFine = 20000;
            for (int j = 0; j <= kFine; ++j) {
                const double u = t - dt + 2.0 * dt * double(j) / kFine;
                if (u >= 0 && u <= 1 && inside(i, u, 0.0)) {
                    if (u < hit_t) {
                        hit = i;
                        hit_t = u;
                    }
                    break;
                }
            }
        }
        if (hit) {
            return {true, hit};
        }
    }
    return {};
}

bool naive_shaded(const sensim::geo::NodeSite& site, const sensim::solar::SunPosition& sun,
                  std::span<const sensim::geo::Building> buildings, std::span<const sensim::geo::TreeOccluder> trees) {
    const double alt = std::max(0.0, sun.altitude) * kRad;
    const double az = sun.azimuth * kRad;
    const double dx = std::cos(alt) * std::sin(az);
    const double dy = std::cos(alt) * std::cos(az);
    const double dz = std::sin(alt);
    const double ox = site.position.x;
    const double oy = site.position.y;
    const double oz = site.mount_height;

    for (const auto& bld : buildings) {
        const auto& f = bld.footprint;
        double lo = 0;
        double hi = kInf;
        if (clip_axis(ox, dx, f.center.x - f.width / 2, f.center.x + f.width / 2, lo, hi) &&
            clip_axis(oy, dy, f.center.y - f.depth / 2, f.center.y + f.depth / 2, lo, hi) &&
            clip_axis(oz, dz, 0.0, bld.height, lo, hi)) {
            return true;
        }
    }
    for (const auto& tree : trees) {
        // Horizontal closest approach of the ray to the trunk axis.
        const double h2 = dx * dx + dy * dy;
        const double px = tree.center.x - ox;
        const double py = tree.center.y - oy;
        double lo = 0;
        double hi = kInf;
        if (h2 == 0.0) {
            if (px * px + py * py > tree.canopy_radius * tree.canopy_radius) {
                continue;
            }
        } else {
            const double s = (px * dx + py * dy) / h2;
            const double cx = ox + s * dx - tree.center.x;
            const double cy = oy + s * dy - tree.center.y;
            const double miss2 = cx * cx + cy * cy;
            const double r2 = tree.canopy_radius * tree.canopy_radius;
            if (miss2 > r2) {
                continue;
            }
            const double half = std::sqrt((r2 - miss2) / h2);
            lo = std::max(lo, s - half);
            hi = std::min(hi, s + half);
            if (lo > hi) {
                continue;
            }
        }
        if (clip_axis(oz, dz, 0.0, tree.height, lo, hi)) {
            return true;
        }
    }
    return false;
}

int minute_scan_shadow(double lat, double lon, const sensim::geo::NodeSite& site, const sensim::CivilDate& date,
                       std::span<const sensim::geo::Building> buildings,
                       std::span<const sensim::geo::TreeOccluder> trees) {
    // Local mean-solar midnight: UTC midnight shifted by four minutes per degree of longitude.
    const sensim::UnixMs midnight = sensim::from_civil(date) - sensim::UnixMs(std::llround(lon * 240.0 * 1000.0));
    int count = 0;
    for (int m = 0; m < 1440; ++m) {
        const auto sun = sensim::solar::sun_position(lat, lon, midnight + sensim::UnixMs(m) * 60000);
        if (sun.altitude > -0.833 && naive_shaded(site, sun, buildings, trees)) {
            ++count;
        }
    }
    return count;
}

double enumerated_rank_sum_p_greater(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::size_t n = pooled.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0;
        double equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += pooled[j] < pooled[i];
            equal += pooled[j] == pooled[i];
        }
        rank[i] = less + (equal + 1) / 2;
    }
    const double observed = std::accumulate(rank.begin(), rank.begin() + std::ptrdiff_t(x.size()), 0.0);
    std::size_t extreme = 0;
    std::size_t total = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        if (std::size_t(__builtin_popcountll(mask)) != x.size()) {
            continue;
        }
        double w = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1) {
                w += rank[i];
            }
        }
        ++total;
        extreme += w >= observed - 1e-9;
    }
    return double(extreme) / double(total);
}

LosCase random_los_case(sensim::Rng& rng) {
    using sensim::uniform;
    LosCase c;
    c.node = {{uniform(rng, -400, 400), uniform(rng, -400, 400)}, uniform(rng, 1, 5)};
    const double heading = uniform(rng, 0, 2 * kPi);
    const double reach = uniform(rng, 50, 800);
    c.tower = {{c.node.position.x + reach * std::cos(heading), c.node.position.y + reach * std::sin(heading)},
               uniform(rng, 15, 45)};
    const int n = 1 + int(uniform(rng, 0, 8));
    for (int i = 0; i < n; ++i) {
        const double t = uniform(rng, 0, 1);
        const double off = uniform(rng, -30, 30);
        const double x = c.node.position.x + t * reach * std::cos(heading) - off * std::sin(heading);
        const double y = c.node.position.y + t * reach * std::sin(heading) + off * std::cos(heading);
        c.buildings.push_back({"B" + std::to_string(i), {{x, y}, uniform(rng, 5, 40), uniform(rng, 5, 40)},
                               uniform(rng, 0, 45)});
    }
    return c;
}

ShadowCase random_shadow_case(sensim::Rng& rng) {
    using sensim::uniform;
    ShadowCase c;
    c.site = {"S", {0, 0}, uniform(rng, 2, 3.5), sensim::geo::SelectionKind::Random, "Z"};
    const sensim::UnixMs day = sensim::from_civil({2021, 1, 1}) + sensim::UnixMs(uniform(rng, 0, 365)) * 86400000;
    c.date = sensim::to_civil(day);
    const int nb = int(uniform(rng, 0, 30));
    while (int(c.buildings.size()) < nb) {
        const double r = uniform(rng, 5, 100);
        const double a = uniform(rng, 0, 2 * kPi);
        const sensim::geo::Rect f{{r * std::cos(a), r * std::sin(a)}, uniform(rng, 5, 40), uniform(rng, 5, 40)};
        if (std::abs(f.center.x) <= f.width / 2 + 0.5 && std::abs(f.center.y) <= f.depth / 2 + 0.5) {
            continue; // keep the panel outside every footprint
        }
        c.buildings.push_back({"B" + std::to_string(c.buildings.size()), f, uniform(rng, 3, 60)});
    }
    const int nt = int(uniform(rng, 0, 6));
    for (int i = 0; i < nt; ++i) {
        const double r = uniform(rng, 4, 30);
        const double a = uniform(rng, 0, 2 * kPi);
        c.trees.push_back({"T" + std::to_string(i), {r * std::cos(a), r * std::sin(a)},
                           uniform(rng, 2, std::min(7.0, r - 1)), uniform(rng, 5, 18)});
    }
    return c;
}

} // namespace oracle
