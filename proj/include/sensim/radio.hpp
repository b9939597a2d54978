// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sensim/geo.hpp"
#include "sensim/rng.hpp"

namespace sensim::radio {

struct LatencyMass {
    int seconds = 0;
    double probability = 0;

    friend bool operator==(const LatencyMass&, const LatencyMass&) = default;
};

/// Direct-transmission latency mass: median 5 s, quartiles 4 and 6 s, a thin tail to 20 s.
std::vector<LatencyMass> default_latency_pmf();

struct RadioParams {
    double ref_path_loss_db = 40;   // at d0
    double ref_distance_m = 1;      // d0
    double path_loss_exponent = 3.0;
    double shadowing_sigma_db = 6;
    double blockage_loss_db = 25;
    /// Extra loss per meter a blocker rises above the link. 0 keeps blockage a flat penalty.
    double obstruction_db_per_m = 0;
    double sensitivity_dbm = -120;
    double dead_sentinel_dbm = -130;
    std::vector<LatencyMass> base_latency_pmf = default_latency_pmf();
};

/// Throws std::invalid_argument naming the first violated invariant.
void validate(const RadioParams& p);

/// Log-distance path loss plus the blockage term, without shadowing.
double mean_rss(double tx_power_dbm, double distance_m, const geo::LosResult& los, const RadioParams& p);

/// Mean RSS of a site/tower link, running the LOS test against `index`.
double mean_rss(const geo::NodeSite& node, const geo::Tower& tower, const geo::BuildingIndex& index,
                const RadioParams& p);

/// Mean RSS plus Normal(0, sigma) shadowing drawn from rng.
double rss(const geo::NodeSite& node, const geo::Tower& tower, const geo::BuildingIndex& index, const RadioParams& p,
           Rng& rng);

double draw_shadowing(const RadioParams& p, Rng& rng);

/// Tower with the highest mean RSS; ties go to the lexicographically lowest tower id.
std::size_t best_tower(std::span<const double> mean_by_tower, std::span<const geo::Tower> towers);

/// Precomputed mean RSS of every site/tower pair and each site's serving tower.
class LinkTable {
public:
    LinkTable() = default;
    LinkTable(const geo::CityModel& city, const RadioParams& p);

    double mean(std::size_t site, std::size_t tower) const { return mean_[site * towers_ + tower]; }
    std::span<const double> row(std::size_t site) const { return {mean_.data() + site * towers_, towers_}; }
    std::size_t serving(std::size_t site) const { return serving_[site]; }
    double serving_mean(std::size_t site) const { return mean(site, serving_[site]); }
    bool blocked(std::size_t site, std::size_t tower) const { return blocked_[site * towers_ + tower] != 0; }
    /// Every tower is below sensitivity with shadowing suppressed.
    bool structurally_dead(std::size_t site) const { return serving_mean(site) < sensitivity_; }
    std::size_t site_count() const { return serving_.size(); }
    std::size_t tower_count() const { return towers_; }

private:
    std::size_t towers_ = 0;
    double sensitivity_ = 0;
    std::vector<double> mean_;
    std::vector<char> blocked_;
    std::vector<std::size_t> serving_;
};

struct Selection {
    std::size_t tower = 0;
    double rss_dbm = 0;
};

/// Ranks on mean RSS and returns the winner with a shadowing draw applied.
Selection select_tower(const LinkTable& links, std::size_t site, const RadioParams& p, Rng& rng);

enum class Outcome { Success, FailWeak, FailOutage };

std::string to_string(Outcome o);

struct ConnectionAttempt {
    std::size_t site = 0;
    std::size_t tower = 0;
    UnixMs t = 0;
    double rss_dbm = 0;
    Outcome outcome = Outcome::Success;
};

/// Outage on the serving tower fails first. Otherwise the link succeeds only when both the
/// mean and the drawn RSS clear the sensitivity, so a structurally dead site never connects.
ConnectionAttempt attempt_connect(const geo::CityModel& city, const LinkTable& links, std::size_t site, UnixMs t,
                                  const RadioParams& p, Rng& rng);

/// Integer seconds drawn from the base pmf by inverse CDF on a 53-bit uniform.
int sample_latency(const RadioParams& p, Rng& rng);
int sample_latency(std::span<const LatencyMass> pmf, Rng& rng);

/// True when there are at least 3 distances and each lies within spread * mean of their mean.
bool ici_check(std::span<const double> distances, double spread_fraction);

struct IciCandidate {
    std::string site_id;
    std::vector<std::string> tower_ids;
    std::vector<double> distances;
};

/// Screens each site's `k` nearest towers (default 3) with ici_check.
std::vector<IciCandidate> ici_candidates(const geo::CityModel& city, double spread_fraction = 0.2, std::size_t k = 3);

} // namespace sensim::radio
