// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sensim::radio {

std::vector<LatencyMass> default_latency_pmf() {
    std::vector<LatencyMass> pmf = {{2, 0.02}, {3, 0.06}, {4, 0.30}, {5, 0.30},
                                    {6, 0.16}, {7, 0.05}, {8, 0.03}, {9, 0.02}};
    // Remaining 6% spread evenly over 10..20 s.
    for (int s = 10; s <= 20; ++s) {
        pmf.push_back({s, 0.06 / 11.0});
    }
    return pmf;
}

void validate(const RadioParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("radio params: ") + what);
        }
    };
    require(p.ref_distance_m > 0, "ref_distance_m must be positive");
    require(p.path_loss_exponent > 0, "path_loss_exponent must be positive");
    require(p.shadowing_sigma_db >= 0, "shadowing_sigma_db must be non-negative");
    require(p.blockage_loss_db >= 0 && p.obstruction_db_per_m >= 0, "blockage losses must be non-negative");
    require(p.sensitivity_dbm > p.dead_sentinel_dbm, "sensitivity must exceed the dead sentinel");
    require(!p.base_latency_pmf.empty(), "latency pmf is empty");
    double total = 0;
    int prev = -1;
    for (const auto& m : p.base_latency_pmf) {
        require(m.seconds >= 2, "latency pmf support must start at 2 s or later");
        require(m.seconds > prev, "latency pmf must be strictly increasing in seconds");
        require(m.probability >= 0, "latency pmf has a negative mass");
        prev = m.seconds;
        total += m.probability;
    }
    require(std::abs(total - 1.0) <= 1e-9, "latency pmf must sum to 1");
}

double mean_rss(double tx_power_dbm, double distance_m, const geo::LosResult& los, const RadioParams& p) {
    if (!(distance_m > 0)) {
        throw std::invalid_argument("rss: node and tower coincide");
    }
    const double path = p.ref_path_loss_db + 10.0 * p.path_loss_exponent * std::log10(distance_m / p.ref_distance_m);
    const double block = los.blocked ? p.blockage_loss_db + p.obstruction_db_per_m * los.max_obstruction_depth : 0.0;
    return tx_power_dbm - path - block;
}

double mean_rss(const geo::NodeSite& node, const geo::Tower& tower, const geo::BuildingIndex& index,
                const RadioParams& p) {
    const auto los = geo::los_blocked({node.position, node.mount_height}, {tower.position, tower.mast_height}, index);
    return mean_rss(tower.tx_power, geo::distance(node.position, tower.position), los, p);
}

double draw_shadowing(const RadioParams& p, Rng& rng) {
    if (p.shadowing_sigma_db == 0) {
        return 0.0;
    }
    std::normal_distribution<double> n(0.0, p.shadowing_sigma_db);
    return n(rng);
}

double rss(const geo::NodeSite& node, const geo::Tower& tower, const geo::BuildingIndex& index, const RadioParams& p,
           Rng& rng) {
    return mean_rss(node, tower, index, p) + draw_shadowing(p, rng);
}

std::size_t best_tower(std::span<const double> mean_by_tower, std::span<const geo::Tower> towers) {
    if (towers.empty()) {
        throw std::invalid_argument("select_tower: no towers");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < towers.size(); ++i) {
        if (mean_by_tower[i] > mean_by_tower[best] ||
            (mean_by_tower[i] == mean_by_tower[best] && towers[i].id < towers[best].id)) {
            best = i;
        }
    }
    return best;
}

LinkTable::LinkTable(const geo::CityModel& city, const RadioParams& p)
    : towers_(city.towers.size()), sensitivity_(p.sensitivity_dbm) {
    if (city.towers.empty()) {
        throw std::invalid_argument("link table: city has no towers");
    }
    const geo::BuildingIndex index(city.buildings);
    mean_.resize(city.sites.size() * towers_);
    blocked_.resize(city.sites.size() * towers_);
    serving_.resize(city.sites.size());
    for (std::size_t s = 0; s < city.sites.size(); ++s) {
        const auto& site = city.sites[s];
        for (std::size_t t = 0; t < towers_; ++t) {
            const auto& tower = city.towers[t];
            const auto los =
                geo::los_blocked({site.position, site.mount_height}, {tower.position, tower.mast_height}, index);
            mean_[s * towers_ + t] = mean_rss(tower.tx_power, geo::distance(site.position, tower.position), los, p);
            blocked_[s * towers_ + t] = los.blocked ? 1 : 0;
        }
        serving_[s] = best_tower(row(s), city.towers);
    }
}

Selection select_tower(const LinkTable& links, std::size_t site, const RadioParams& p, Rng& rng) {
    const std::size_t t = links.serving(site);
    return {t, links.mean(site, t) + draw_shadowing(p, rng)};
}

std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::Success:
        return "success";
    case Outcome::FailWeak:
        return "fail_weak";
    case Outcome::FailOutage:
        return "fail_outage";
    }
    return "unknown";
}

ConnectionAttempt attempt_connect(const geo::CityModel& city, const LinkTable& links, std::size_t site, UnixMs t,
                                  const RadioParams& p, Rng& rng) {
    const Selection sel = select_tower(links, site, p, rng);
    ConnectionAttempt a{site, sel.tower, t, sel.rss_dbm, Outcome::Success};
    if (city.towers[sel.tower].in_outage(t)) {
        a.outcome = Outcome::FailOutage;
    } else if (links.structurally_dead(site) || sel.rss_dbm < p.sensitivity_dbm) {
        a.outcome = Outcome::FailWeak;
    }
    return a;
}

int sample_latency(std::span<const LatencyMass> pmf, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0;
    for (const auto& m : pmf) {
        acc += m.probability;
        if (u < acc) {
            return m.seconds;
        }
    }
    return pmf.back().seconds; // rounding slack at the top of the CDF
}

int sample_latency(const RadioParams& p, Rng& rng) { return sample_latency(p.base_latency_pmf, rng); }

bool ici_check(std::span<const double> distances, double spread_fraction) {
    if (distances.size() < 3) {
        return false;
    }
    const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / double(distances.size());
    return std::all_of(distances.begin(), distances.end(),
                       [&](double d) { return std::abs(d - mean) <= spread_fraction * mean; });
}

std::vector<IciCandidate> ici_candidates(const geo::CityModel& city, double spread_fraction, std::size_t k) {
    std::vector<IciCandidate> out;
    if (k < 3 || city.towers.size() < k) {
        return out;
    }
    for (const auto& site : city.sites) {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(city.towers.size());
        for (std::size_t t = 0; t < city.towers.size(); ++t) {
            d.emplace_back(geo::distance(site.position, city.towers[t].position), t);
        }
        std::partial_sort(d.begin(), d.begin() + std::ptrdiff_t(k), d.end());
        std::vector<double> dist;
        for (std::size_t i = 0; i < k; ++i) {
            dist.push_back(d[i].first);
        }
        if (ici_check(dist, spread_fraction)) {
            IciCandidate c{site.id, {}, dist};
            for (std::size_t i = 0; i < k; ++i) {
                c.tower_ids.push_back(city.towers[d[i].second].id);
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

} // namespace sensim::radio
