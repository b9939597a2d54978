// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "sensim/rng.hpp"
#include "sensim/solar.hpp"

namespace sensim::analysis {

namespace {

bool inside_any(const geo::GeoPoint& p, std::span<const geo::Building> buildings) {
    return std::any_of(buildings.begin(), buildings.end(),
                       [&](const geo::Building& b) { return b.footprint.bounds().contains(p); });
}

} // namespace

// ---------------------------------------------------------------------------
// Cleaning

CleanReport clean_in_place(ledger::Ledger& ledger, const std::vector<bool>& tower_in_bounds) {
    CleanReport r;
    auto out = ledger.rows.begin();
    for (auto it = ledger.rows.begin(); it != ledger.rows.end(); ++it) {
        const ledger::LedgerRow& row = *it;
        if (!row.has_rss()) {
            ++r.dropped_no_connectivity;
            continue;
        }
        if (row.rss_dbm == 0.0f) {
            ++r.dropped_zero_signal;
            continue;
        }
        if (!row.unknown_tower()) {
            const auto t = std::size_t(row.tower);
            if (t >= tower_in_bounds.size() || !tower_in_bounds[t]) {
                ++r.dropped_out_of_bounds_tower;
                continue;
            }
        }
        if (row.latency_s > kMaxLatencyS) {
            ++r.dropped_delay_gt_24h;
            continue;
        }
        if (row.unknown_tower()) {
            ++r.flagged_unknown_tower;
        }
        ++r.kept_count;
        *out++ = row;
    }
    ledger.rows.erase(out, ledger.rows.end());
    return r;
}

CleanReport clean_in_place(ledger::Ledger& ledger, const geo::CityModel& city) {
    const geo::Bounds extent = city.extent();
    std::vector<bool> in_bounds(ledger.towers.size(), false);
    for (std::size_t t = 0; t < ledger.towers.size(); ++t) {
        const geo::Tower* tower = city.find_tower(ledger.towers[t]);
        in_bounds[t] = tower != nullptr && extent.contains(tower->position);
    }
    return clean_in_place(ledger, in_bounds);
}

ledger::Ledger clean(const ledger::Ledger& ledger, const geo::CityModel& city, CleanReport& report) {
    ledger::Ledger copy = ledger;
    report = clean_in_place(copy, city);
    return copy;
}

std::vector<std::string> unknown_nodes(const ledger::Ledger& ledger, const geo::CityModel& city) {
    std::unordered_set<std::string_view> sites;
    for (const auto& s : city.sites) {
        sites.insert(s.id);
    }
    std::vector<bool> used(ledger.nodes.size(), false);
    for (const auto& r : ledger.rows) {
        used[r.node] = true;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ledger.nodes.size(); ++i) {
        if (used[i] && !sites.contains(ledger.nodes[i])) {
            out.push_back(ledger.nodes[i]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// KPIs

double pct2(std::size_t count, std::size_t total) {
    if (total == 0) {
        return 0.0;
    }
    return std::round(10000.0 * double(count) / double(total)) / 100.0;
}

std::vector<LatencyRow> latency_table(const ledger::Ledger& ledger, const std::vector<int>& thresholds) {
    std::vector<int> sorted = thresholds;
    std::sort(sorted.begin(), sorted.end());
    // Histogram against the sorted thresholds, then a suffix sum.
    std::vector<std::size_t> bins(sorted.size() + 1, 0);
    for (const auto& r : ledger.rows) {
        const auto k = std::size_t(std::upper_bound(sorted.begin(), sorted.end(), r.latency_s) - sorted.begin());
        ++bins[k];
    }
    std::map<int, std::size_t> at_least;
    std::size_t acc = 0;
    for (std::size_t k = sorted.size(); k-- > 0;) {
        acc += bins[k + 1];
        at_least[sorted[k]] = acc;
    }
    std::vector<LatencyRow> out;
    for (int t : thresholds) {
        out.push_back({t, at_least[t], pct2(at_least[t], ledger.rows.size())});
    }
    return out;
}

std::vector<NodeSummary> node_summaries(const ledger::Ledger& ledger, const std::vector<std::string>& site_ids) {
    const std::size_t n = ledger.nodes.size();
    std::vector<std::vector<float>> rss(n);
    std::vector<std::vector<std::int32_t>> lat(n);
    std::vector<std::array<std::size_t, 3>> delayed(n, std::array<std::size_t, 3>{});
    for (const auto& r : ledger.rows) {
        if (r.has_rss()) {
            rss[r.node].push_back(r.rss_dbm);
        }
        lat[r.node].push_back(r.latency_s);
        for (std::size_t k = 0; k < kDelayMarks.size(); ++k) {
            delayed[r.node][k] += r.latency_s >= kDelayMarks[k] ? 1 : 0;
        }
    }
    auto summarize = [&](const std::string& id) {
        NodeSummary s;
        s.node_id = id;
        const auto idx = ledger.nodes.find(id);
        if (!idx) {
            return s;
        }
        s.reading_count = lat[*idx].size();
        s.connected_count = rss[*idx].size();
        s.delayed_count_at = delayed[*idx];
        if (auto m = stats::lower_median(std::move(rss[*idx]))) {
            s.median_rss = double(*m);
        }
        if (auto m = stats::lower_median(std::move(lat[*idx]))) {
            s.median_latency = int(*m);
        }
        return s;
    };
    std::vector<NodeSummary> out;
    std::unordered_set<std::string> listed;
    for (const auto& id : site_ids) {
        if (listed.insert(id).second) {
            out.push_back(summarize(id));
        }
    }
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < n; ++i) {
        if (!listed.contains(ledger.nodes[i]) && !lat[i].empty()) {
            rest.push_back(ledger.nodes[i]);
        }
    }
    std::sort(rest.begin(), rest.end());
    for (const auto& id : rest) {
        out.push_back(summarize(id));
    }
    return out;
}

std::vector<std::string> detect_dead_zones(const std::vector<NodeSummary>& summaries, double threshold_success_rate) {
    std::vector<std::string> out;
    for (const auto& s : summaries) {
        const double rate = s.reading_count == 0 ? 0.0 : double(s.connected_count) / double(s.reading_count);
        if (s.never_connected() || rate <= threshold_success_rate) {
            out.push_back(s.node_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Dead-zone forensics

std::vector<std::optional<geo::NodeSite>> relocate_dead_sites(const geo::CityModel& city,
                                                              const std::vector<std::string>& dead_sites,
                                                              const radio::RadioParams& radio,
                                                              const RelocationOptions& options) {
    const geo::BuildingIndex index(city.buildings);
    const geo::Bounds extent = city.extent();
    auto connects = [&](const geo::NodeSite& s) {
        for (const auto& t : city.towers) {
            const double d = geo::distance(s.position, t.position);
            if (!(d > 0)) {
                continue;
            }
            const auto los = geo::los_blocked({s.position, s.mount_height}, {t.position, t.mast_height}, index);
            if (!los.blocked && radio::mean_rss(t.tx_power, d, los, radio) >= radio.sensitivity_dbm + options.margin_db) {
                return true;
            }
        }
        return false;
    };
    std::vector<std::optional<geo::NodeSite>> out;
    for (const auto& id : dead_sites) {
        const geo::NodeSite* site = city.find_site(id);
        if (site == nullptr) {
            throw std::invalid_argument("relocate_dead_sites: unknown site '" + id + "'");
        }
        std::optional<geo::NodeSite> found;
        for (double r = options.min_radius; r <= options.max_radius + 1e-9 && !found; r += options.radius_step) {
            for (int k = 0; k < options.azimuths && !found; ++k) {
                const double az = 2.0 * std::numbers::pi * k / options.azimuths;
                geo::NodeSite c = *site;
                c.id = id + "-R";
                c.position = {site->position.x + r * std::sin(az), site->position.y + r * std::cos(az)};
                if (!extent.contains(c.position) || inside_any(c.position, city.buildings)) {
                    continue;
                }
                if (connects(c)) {
                    found = std::move(c);
                }
            }
        }
        out.push_back(std::move(found));
    }
    return out;
}

double tallest_within(const geo::NodeSite& site, std::span<const geo::Building> buildings, double radius) {
    return geo::building_stats(site, buildings, radius).tallest_height.value_or(0.0);
}

ForensicsResult dead_vs_relocated(const geo::CityModel& city, const std::vector<geo::NodeSite>& dead_sites,
                                  const std::vector<geo::NodeSite>& relocated_sites) {
    if (dead_sites.size() != relocated_sites.size()) {
        throw std::invalid_argument("dead_vs_relocated: paired lists differ in length");
    }
    ForensicsResult out;
    std::vector<double> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < dead_sites.size(); ++i) {
        SitePair p;
        p.dead_id = dead_sites[i].id;
        p.relocated_id = relocated_sites[i].id;
        p.dead_tallest = tallest_within(dead_sites[i], city.buildings);
        p.relocated_tallest = tallest_within(relocated_sites[i], city.buildings);
        a.push_back(p.dead_tallest);
        b.push_back(p.relocated_tallest);
        out.pairs.push_back(std::move(p));
    }
    if (!a.empty()) {
        out.test = stats::rank_sum_test(a, b, stats::Alternative::Greater);
    }
    return out;
}

DistanceComparison distance_comparison(const geo::CityModel& city, const std::vector<std::string>& dead_ids) {
    const std::unordered_set<std::string> dead(dead_ids.begin(), dead_ids.end());
    DistanceComparison out;
    for (const auto& s : city.sites) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : city.towers) {
            best = std::min(best, geo::distance(s.position, t.position));
        }
        (dead.contains(s.id) ? out.dead_m : out.healthy_m).push_back(best);
    }
    if (!out.dead_m.empty() && !out.healthy_m.empty()) {
        out.test = stats::rank_sum_test(out.dead_m, out.healthy_m, stats::Alternative::TwoSided);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Power-saving mode

PsmStats psm_stats(const std::vector<power::PsmEpisode>& episodes, int sampling_interval_s) {
    if (sampling_interval_s <= 0) {
        throw std::invalid_argument("psm_stats: sampling interval must be positive");
    }
    PsmStats s;
    s.episode_count = episodes.size();
    std::vector<std::int64_t> lens;
    for (const auto& e : episodes) {
        const std::int64_t ms = e.end - e.start;
        lens.push_back(ms);
        s.total_ms += ms;
        s.per_device_ms[e.node_id] += ms;
    }
    s.device_count = s.per_device_ms.size();
    s.total_s = double(s.total_ms) / 1000.0;
    s.lost_readings_estimate = s.total_ms / (std::int64_t(sampling_interval_s) * kMsPerSecond);
    if (!lens.empty()) {
        const auto [lo, hi] = std::minmax_element(lens.begin(), lens.end());
        s.min_len_s = double(*lo) / 1000.0;
        s.max_len_s = double(*hi) / 1000.0;
        s.median_len_s = double(*stats::lower_median(lens)) / 1000.0;
    }
    return s;
}

std::vector<std::string> winter_psm_devices(const std::vector<power::PsmEpisode>& episodes) {
    std::set<std::string> out;
    for (const auto& e : episodes) {
        const int y0 = to_civil(e.start).year - 1;
        const int y1 = to_civil(e.end).year;
        for (int y = y0; y <= y1; ++y) {
            const UnixMs ws = from_civil({y, 12, 1});
            const UnixMs we = from_civil({y + 1, 3, 1});
            if (e.start < we && e.end > ws) {
                out.insert(e.node_id);
                break;
            }
        }
    }
    return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------
// Delayed readings

std::string to_string(GroupBy g) {
    switch (g) {
    case GroupBy::Date:
        return "date";
    case GroupBy::Node:
        return "node";
    case GroupBy::Tower:
        return "tower";
    }
    return "?";
}

std::vector<GroupShare> delayed_concentration(const ledger::Ledger& ledger, int latency_threshold_s, GroupBy by) {
    // Dense integer keys first, names at the end.
    std::unordered_map<std::int64_t, std::pair<std::size_t, std::size_t>> counts;
    std::size_t delayed_total = 0;
    for (const auto& r : ledger.rows) {
        std::int64_t key = 0;
        switch (by) {
        case GroupBy::Date:
            key = utc_day_index(r.sample_time);
            break;
        case GroupBy::Node:
            key = r.node;
            break;
        case GroupBy::Tower:
            key = r.tower;
            break;
        }
        auto& c = counts[key];
        ++c.second;
        if (r.latency_s >= latency_threshold_s) {
            ++c.first;
            ++delayed_total;
        }
    }
    std::vector<GroupShare> out;
    out.reserve(counts.size());
    for (const auto& [key, c] : counts) {
        GroupShare g;
        switch (by) {
        case GroupBy::Date:
            g.key = to_date_string(key * kMsPerDay);
            break;
        case GroupBy::Node:
            g.key = ledger.nodes[std::size_t(key)];
            break;
        case GroupBy::Tower:
            g.key = key == ledger::kUnknownTower ? std::string(ledger::kUnknownTowerId) : ledger.towers[std::size_t(key)];
            break;
        }
        g.delayed = c.first;
        g.total = c.second;
        g.delayed_pct = delayed_total ? 100.0 * double(c.first) / double(delayed_total) : 0.0;
        g.total_pct = 100.0 * double(c.second) / double(ledger.rows.size());
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const GroupShare& a, const GroupShare& b) {
        return a.delayed != b.delayed ? a.delayed > b.delayed : a.key < b.key;
    });
    return out;
}

TopShare top_share(const std::vector<GroupShare>& groups, std::size_t k) {
    TopShare s;
    for (std::size_t i = 0; i < std::min(k, groups.size()); ++i) {
        s.delayed_pct += groups[i].delayed_pct;
        s.total_pct += groups[i].total_pct;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Temporal features

std::optional<std::size_t> WeatherSeries::hour_index(UnixMs t) const {
    if (t < start) {
        return std::nullopt;
    }
    const auto i = std::size_t((t - start) / kMsPerHour);
    if (i >= temperature_c.size()) {
        return std::nullopt;
    }
    return i;
}

WeatherSeries synthetic_weather(UnixMs start, UnixMs end, std::uint64_t seed) {
    WeatherSeries w;
    w.start = start - ((start % kMsPerHour) + kMsPerHour) % kMsPerHour;
    const auto hours = std::size_t(std::max<UnixMs>(0, end - w.start + kMsPerHour - 1) / kMsPerHour);
    Rng rng = substream(seed, "weather");
    std::normal_distribution<double> noise(0.0, 1.0);
    double anomaly = 0;
    bool wet = false;
    for (std::size_t h = 0; h < hours; ++h) {
        const UnixMs t = w.start + UnixMs(h) * kMsPerHour;
        const double doy = day_of_year(t);
        const double local_hour = double(((t / kMsPerHour) - 6) % 24 + 24);
        const double seasonal = 10.0 - 14.0 * std::cos(2.0 * std::numbers::pi * (doy - 20.0) / 365.25);
        const double diurnal = 4.0 * std::sin(2.0 * std::numbers::pi * (local_hour - 9.0) / 24.0);
        anomaly = 0.97 * anomaly + 0.8 * noise(rng);
        w.temperature_c.push_back(seasonal + diurnal + anomaly);
        // Two-state Markov chain for rain, exponential amounts while wet.
        wet = wet ? uniform01(rng) < 0.8 : uniform01(rng) < 0.03;
        w.precipitation_mm.push_back(wet ? -std::log1p(-uniform01(rng)) * 1.2 : 0.0);
    }
    return w;
}

namespace {

UnixMs local_time(UnixMs t, int utc_offset_h) { return t + utc_offset_h * kMsPerHour; }

int local_hour(UnixMs t, int utc_offset_h) {
    const UnixMs lt = local_time(t, utc_offset_h);
    return int((lt - utc_day_index(lt) * kMsPerDay) / kMsPerHour);
}

} // namespace

std::vector<TemporalCorrelation> temporal_null_check(const ledger::Ledger& ledger, const WeatherSeries& weather,
                                                     const TemporalOptions& options) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
        if (ledger.rows[i].has_rss() && weather.hour_index(ledger.rows[i].sample_time)) {
            eligible.push_back(i);
        }
    }
    // Partial Fisher-Yates picks a subsample without replacement; sorted back for stable order.
    Rng rng = substream(options.seed, "temporal/subsample");
    const std::size_t n = std::min(options.subsample, eligible.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + std::size_t(uniform01(rng) * double(eligible.size() - i));
        std::swap(eligible[i], eligible[std::min(j, eligible.size() - 1)]);
    }
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());

    std::vector<double> rss;
    std::vector<double> latency;
    std::vector<double> hour;
    std::vector<double> wday;
    std::vector<double> temp;
    std::vector<double> precip;
    for (std::size_t i : eligible) {
        const auto& r = ledger.rows[i];
        const std::size_t h = *weather.hour_index(r.sample_time);
        rss.push_back(r.rss_dbm);
        latency.push_back(r.latency_s);
        hour.push_back(local_hour(r.sample_time, options.utc_offset_h));
        wday.push_back(weekday(local_time(r.sample_time, options.utc_offset_h)));
        temp.push_back(weather.temperature_c[h]);
        precip.push_back(weather.precipitation_mm[h]);
    }
    const std::vector<std::pair<std::string, const std::vector<double>*>> targets{{"rss_dbm", &rss},
                                                                                  {"latency_s", &latency}};
    const std::vector<std::pair<std::string, const std::vector<double>*>> features{
        {"hour_of_day", &hour}, {"weekday", &wday}, {"temperature_c", &temp}, {"precipitation_mm", &precip}};
    std::vector<TemporalCorrelation> out;
    std::uint64_t k = 0;
    for (const auto& [tn, tv] : targets) {
        for (const auto& [fn, fv] : features) {
            TemporalCorrelation c;
            c.target = tn;
            c.feature = fn;
            c.n = n;
            if (n < 3) {
                c.result.reason = "fewer than 3 readings";
            } else {
                c.result = stats::spearman_permutation(*tv, *fv, options.permutations, mix64(options.seed + ++k));
            }
            out.push_back(std::move(c));
        }
    }
    std::vector<std::optional<double>> raw;
    for (const auto& c : out) {
        raw.push_back(c.result.p);
    }
    const auto adjusted = stats::holm_adjust(raw);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].p_holm = adjusted[i];
    }
    return out;
}

void plant_diurnal_rss(ledger::Ledger& ledger, double amplitude_db, int utc_offset_h) {
    for (auto& r : ledger.rows) {
        if (r.has_rss()) {
            const double h = local_hour(r.sample_time, utc_offset_h);
            r.rss_dbm = float(std::round(r.rss_dbm + amplitude_db * (h / 23.0 - 0.5)));
        }
    }
}

// ---------------------------------------------------------------------------
// Equity

namespace {

EquityShare share_of(const std::vector<const geo::NodeSite*>& sites, const geo::CityModel& city) {
    EquityShare s;
    s.n = sites.size();
    if (sites.empty()) {
        s.reason = "empty site set";
        return s;
    }
    std::size_t dis = 0;
    std::size_t mm = 0;
    for (const auto* site : sites) {
        const geo::ZoneAttr* z = city.find_zone(site->zone_id);
        if (z == nullptr) {
            throw std::invalid_argument("equity_report: site '" + site->id + "' has no zone");
        }
        dis += z->disadvantaged ? 1 : 0;
        mm += z->majority_minority() ? 1 : 0;
    }
    s.disadvantaged = double(dis) / double(sites.size());
    s.majority_minority = double(mm) / double(sites.size());
    return s;
}

} // namespace

EquityReport equity_report(const std::string& set_name, const std::vector<std::string>& issue_sites,
                           const geo::CityModel& city) {
    std::vector<const geo::NodeSite*> issue;
    std::unordered_set<std::string_view> seen;
    for (const auto& id : issue_sites) {
        const geo::NodeSite* s = city.find_site(id);
        if (s == nullptr) {
            throw std::invalid_argument("equity_report: '" + id + "' is not a site of the city");
        }
        if (seen.insert(s->id).second) {
            issue.push_back(s);
        }
    }
    std::vector<const geo::NodeSite*> all;
    for (const auto& s : city.sites) {
        all.push_back(&s);
    }
    EquityReport r;
    r.set_name = set_name;
    r.issue = share_of(issue, city);
    r.baseline = share_of(all, city);
    return r;
}

// ---------------------------------------------------------------------------
// PSM predictability

std::vector<SiteFeatures> site_features(const geo::CityModel& city, const CivilDate& solstice) {
    const solar::OccluderSet occ{city.buildings, city.trees};
    std::vector<SiteFeatures> out;
    for (const auto& site : city.sites) {
        SiteFeatures f;
        f.site_id = site.id;
        const geo::BuildingStats s500 = geo::building_stats(site, city.buildings, 500);
        f.values.push_back(s500.closest_distance.value_or(500.0));
        f.values.push_back(s500.closest_height.value_or(0.0));
        for (double radius : {100.0, 250.0, 500.0}) {
            const geo::BuildingStats s = geo::building_stats(site, city.buildings, radius);
            f.values.push_back(s.mean_height.value_or(0.0));
            f.values.push_back(s.median_height.value_or(0.0));
            f.values.push_back(s.tallest_height.value_or(0.0));
        }
        f.values.push_back(solar::shadow_minutes(city.origin_lat, city.origin_lon, site, solstice, occ));
        out.push_back(std::move(f));
    }
    return out;
}

PsmPrediction predict_psm(const std::vector<SiteFeatures>& features, const std::vector<bool>& psm_flags,
                          const std::vector<double>& psm_durations_s) {
    if (features.size() != psm_flags.size() || features.size() != psm_durations_s.size()) {
        throw std::invalid_argument("predict_psm: features, flags and durations differ in length");
    }
    if (features.empty()) {
        throw std::invalid_argument("predict_psm: no sites");
    }
    const auto k = Eigen::Index(features.front().values.size());
    Eigen::MatrixXd x(Eigen::Index(features.size()), k);
    Eigen::VectorXd y(Eigen::Index(features.size()));
    std::vector<Eigen::Index> flagged;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (Eigen::Index(features[i].values.size()) != k) {
            throw std::invalid_argument("predict_psm: ragged feature rows");
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            x(Eigen::Index(i), j) = features[i].values[std::size_t(j)];
        }
        y[Eigen::Index(i)] = psm_flags[i] ? 1.0 : 0.0;
        if (psm_flags[i]) {
            flagged.push_back(Eigen::Index(i));
        }
    }
    std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
    names.resize(std::size_t(k), "x");
    PsmPrediction out;
    out.logistic = regression::fit_logistic(x, y, names);
    if (flagged.size() >= 2) {
        Eigen::MatrixXd xf(Eigen::Index(flagged.size()), k);
        Eigen::VectorXd yf(Eigen::Index(flagged.size()));
        for (std::size_t i = 0; i < flagged.size(); ++i) {
            xf.row(Eigen::Index(i)) = x.row(flagged[i]);
            yf[Eigen::Index(i)] = psm_durations_s[std::size_t(flagged[i])];
        }
        out.linear = regression::fit_ols(xf, yf, names);
    } else {
        out.linear.note = "fewer than 2 sites with an episode";
    }
    return out;
}

} // namespace sensim::analysis
