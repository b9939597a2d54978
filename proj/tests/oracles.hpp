// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

// Brute-force reference implementations. They share no code with the library beyond the plain
// data types and the sun position, and favor obviousness over speed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sensim/geo.hpp"
#include "sensim/rng.hpp"
#include "sensim/solar.hpp"

namespace oracle {

/// Great-circle distance in meters.
double haversine(double lat1, double lon1, double lat2, double lon2);

struct SampledLos {
    bool blocked = false;
    std::optional<std::size_t> first_blocker;
};

/// Walks the segment in steps of at most `step_m` and reports the first building whose volume
/// (closed footprint, ground to roof) contains a sample point. Near a volume the walk refines to
/// a ten-thousandth of the step, so grazing cuts well under a millimeter are still seen.
SampledLos sampled_los(const sensim::geo::AntennaPoint& a, const sensim::geo::AntennaPoint& b,
                       std::span<const sensim::geo::Building> buildings, double step_m = 0.005);

/// Ray from the panel toward the sun, altitude clamped at the horizon, against every occluder.
bool naive_shaded(const sensim::geo::NodeSite& site, const sensim::solar::SunPosition& sun,
                  std::span<const sensim::geo::Building> buildings, std::span<const sensim::geo::TreeOccluder> trees);

/// Minute-by-minute scan of the local solar day, counting daytime minutes with naive_shaded.
int minute_scan_shadow(double lat, double lon, const sensim::geo::NodeSite& site, const sensim::CivilDate& date,
                       std::span<const sensim::geo::Building> buildings,
                       std::span<const sensim::geo::TreeOccluder> trees);

/// One-sided exact rank-sum p-value (x greater than y) by enumerating every split of the pooled
/// midranks. Only for small samples.
double enumerated_rank_sum_p_greater(const std::vector<double>& x, const std::vector<double>& y);

/// Random segment with a handful of boxes scattered along it, about half of them in the way.
struct LosCase {
    sensim::geo::AntennaPoint node;
    sensim::geo::AntennaPoint tower;
    std::vector<sensim::geo::Building> buildings;
};
LosCase random_los_case(sensim::Rng& rng);

/// Site at the origin with random buildings and trees nearby on a random 2021 date.
struct ShadowCase {
    sensim::geo::NodeSite site;
    sensim::CivilDate date;
    std::vector<sensim::geo::Building> buildings;
    std::vector<sensim::geo::TreeOccluder> trees;
};
ShadowCase random_shadow_case(sensim::Rng& rng);

/// Max over coordinates of |analytic - central difference| / max(1, |central difference|).
template <class F, class G, class V>
double gradient_mismatch(F&& f, G&& grad, const V& at, double h = 1e-6) {
    const V g = grad(at);
    double worst = 0;
    for (int i = 0; i < at.size(); ++i) {
        V p = at;
        V m = at;
        p[i] += h;
        m[i] -= h;
        const double fd = (f(p) - f(m)) / (2 * h);
        const double diff = std::abs(g[i] - fd);
        const double rel = diff / std::max(1.0, std::abs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace oracle
