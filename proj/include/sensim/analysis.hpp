// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sensim/geo.hpp"
#include "sensim/ledger.hpp"
#include "sensim/power.hpp"
#include "sensim/radio.hpp"
#include "sensim/regression.hpp"
#include "sensim/stats.hpp"

namespace sensim::analysis {

inline constexpr double kDeadSentinelDbm = -130.0;
inline constexpr std::int32_t kMaxLatencyS = 86400;

// ---------------------------------------------------------------------------
// Cleaning

struct CleanReport {
    std::size_t kept_count = 0;
    std::size_t dropped_no_connectivity = 0;
    std::size_t dropped_zero_signal = 0;
    std::size_t dropped_out_of_bounds_tower = 0;
    std::size_t dropped_delay_gt_24h = 0;
    std::size_t flagged_unknown_tower = 0; // kept, excluded from distance and direction work

    std::size_t input_count() const {
        return kept_count + dropped_no_connectivity + dropped_zero_signal + dropped_out_of_bounds_tower +
               dropped_delay_gt_24h;
    }
    friend bool operator==(const CleanReport&, const CleanReport&) = default;
};

/// in_bounds[t] tells whether ledger tower t is located inside the city. Rules apply in order,
/// each row counted under the first rule it hits.
CleanReport clean_in_place(ledger::Ledger& ledger, const std::vector<bool>& tower_in_bounds);
/// Towers are located through the city; an id the city does not know cannot be placed and is
/// treated as outside.
CleanReport clean_in_place(ledger::Ledger& ledger, const geo::CityModel& city);
ledger::Ledger clean(const ledger::Ledger& ledger, const geo::CityModel& city, CleanReport& report);

/// Ledger node ids that are not sites of the city, sorted.
std::vector<std::string> unknown_nodes(const ledger::Ledger& ledger, const geo::CityModel& city);

// ---------------------------------------------------------------------------
// KPIs

inline const std::vector<int> kDefaultLatencyThresholds{7, 10, 15, 20, 30, 60, 120, 300, 3600, 7200};

struct LatencyRow {
    int threshold_s = 0;
    std::size_t count = 0; // rows with latency >= threshold
    double pct = 0;        // 100 * count / total, two decimals
};

std::vector<LatencyRow> latency_table(const ledger::Ledger& ledger,
                                      const std::vector<int>& thresholds = kDefaultLatencyThresholds);

/// Percentage rounded half away from zero to two decimals; 0 for an empty total.
double pct2(std::size_t count, std::size_t total);

inline constexpr std::array<int, 3> kDelayMarks{10, 30, 60};

struct NodeSummary {
    std::string node_id;
    double median_rss = kDeadSentinelDbm; // sentinel when no reading carries RSS
    std::optional<int> median_latency;
    std::size_t reading_count = 0;
    std::size_t connected_count = 0; // readings with an RSS value
    std::array<std::size_t, 3> delayed_count_at{}; // latency >= 10, 30, 60 s

    bool never_connected() const { return connected_count == 0; }
};

/// One summary per id in `site_ids` (sites with no rows included), then any ledger node not listed.
std::vector<NodeSummary> node_summaries(const ledger::Ledger& ledger, const std::vector<std::string>& site_ids = {});

/// Sites whose share of connected readings is at most `threshold_success_rate` (0: never connected).
std::vector<std::string> detect_dead_zones(const std::vector<NodeSummary>& summaries,
                                           double threshold_success_rate = 0.0);

// ---------------------------------------------------------------------------
// Dead-zone forensics

struct RelocationOptions {
    double min_radius = 120;
    double max_radius = 1500;
    double radius_step = 30;
    int azimuths = 24;
    double margin_db = 10; // required clearance above sensitivity
};

/// Nearest candidate on a spiral around each dead site that sits outside every footprint, inside
/// the city, and has a clear line of sight to a tower whose mean RSS clears sensitivity + margin.
/// Sites with no such candidate map to nullopt.
std::vector<std::optional<geo::NodeSite>> relocate_dead_sites(const geo::CityModel& city,
                                                              const std::vector<std::string>& dead_sites,
                                                              const radio::RadioParams& radio = {},
                                                              const RelocationOptions& options = {});

/// Height of the tallest building whose footprint center lies within `radius`; 0 if none.
double tallest_within(const geo::NodeSite& site, std::span<const geo::Building> buildings, double radius = 100);

struct SitePair {
    std::string dead_id;
    std::string relocated_id;
    double dead_tallest = 0;
    double relocated_tallest = 0;
};

struct ForensicsResult {
    std::vector<SitePair> pairs;
    stats::RankSumResult test; // dead taller than relocated, one-sided
};

/// Throws std::invalid_argument when the lists differ in length.
ForensicsResult dead_vs_relocated(const geo::CityModel& city, const std::vector<geo::NodeSite>& dead_sites,
                                  const std::vector<geo::NodeSite>& relocated_sites);

struct DistanceComparison {
    std::vector<double> dead_m;
    std::vector<double> healthy_m;
    stats::RankSumResult test; // two-sided
};

/// Nearest-tower distance of dead versus healthy sites.
DistanceComparison distance_comparison(const geo::CityModel& city, const std::vector<std::string>& dead_ids);

// ---------------------------------------------------------------------------
// Power-saving mode

struct PsmStats {
    std::size_t episode_count = 0;
    std::int64_t total_ms = 0;
    double total_s = 0;
    double median_len_s = 0; // lower median
    double max_len_s = 0;
    double min_len_s = 0;
    std::map<std::string, std::int64_t> per_device_ms;
    std::size_t device_count = 0;
    std::int64_t lost_readings_estimate = 0; // floor(total / sampling interval)
};

PsmStats psm_stats(const std::vector<power::PsmEpisode>& episodes, int sampling_interval_s = 300);

/// Devices with any episode overlapping December through February, sorted.
std::vector<std::string> winter_psm_devices(const std::vector<power::PsmEpisode>& episodes);

// ---------------------------------------------------------------------------
// Delayed readings

enum class GroupBy { Date, Node, Tower };
std::string to_string(GroupBy g);

struct GroupShare {
    std::string key;
    std::size_t delayed = 0;
    std::size_t total = 0;
    double delayed_pct = 0; // share of all delayed rows
    double total_pct = 0;   // share of all rows
};

/// Groups sorted by delayed count (descending), then key. Dates are UTC sample dates.
std::vector<GroupShare> delayed_concentration(const ledger::Ledger& ledger, int latency_threshold_s, GroupBy by);

struct TopShare {
    double delayed_pct = 0;
    double total_pct = 0;
};

TopShare top_share(const std::vector<GroupShare>& groups, std::size_t k);

// ---------------------------------------------------------------------------
// Temporal features

/// Hourly synthetic weather. The simulator never reads it.
struct WeatherSeries {
    UnixMs start = 0; // first hour
    std::vector<double> temperature_c;
    std::vector<double> precipitation_mm;

    std::optional<std::size_t> hour_index(UnixMs t) const;
};

WeatherSeries synthetic_weather(UnixMs start, UnixMs end, std::uint64_t seed);

struct TemporalOptions {
    std::size_t subsample = 5000;
    int permutations = 1000;
    std::uint64_t seed = 1;
    int utc_offset_h = -6;
};

struct TemporalCorrelation {
    std::string target;  // rss_dbm | latency_s
    std::string feature; // hour_of_day | weekday | temperature_c | precipitation_mm
    std::size_t n = 0;
    stats::PermutationResult result;
    std::optional<double> p_holm; // adjusted across the whole family of checks
};

std::vector<TemporalCorrelation> temporal_null_check(const ledger::Ledger& ledger, const WeatherSeries& weather,
                                                     const TemporalOptions& options = {});

/// Adds a within-day ramp to every RSS: amplitude * (local_hour / 23 - 0.5).
void plant_diurnal_rss(ledger::Ledger& ledger, double amplitude_db, int utc_offset_h = -6);

// ---------------------------------------------------------------------------
// Equity

struct EquityShare {
    std::size_t n = 0;
    std::optional<double> disadvantaged;
    std::optional<double> majority_minority;
    std::string reason; // why the fractions are undefined
};

struct EquityReport {
    std::string set_name;
    EquityShare issue;
    EquityShare baseline;
};

/// Throws std::invalid_argument naming the first id that is not a site of the city.
EquityReport equity_report(const std::string& set_name, const std::vector<std::string>& issue_sites,
                           const geo::CityModel& city);

// ---------------------------------------------------------------------------
// PSM predictability

inline const std::vector<std::string> kFeatureNames{
    "closest_building_distance", "closest_building_height", "mean_height_100",  "median_height_100",
    "tallest_height_100",        "mean_height_250",         "median_height_250", "tallest_height_250",
    "mean_height_500",           "median_height_500",       "tallest_height_500", "winter_shadow_minutes"};

struct SiteFeatures {
    std::string site_id;
    std::vector<double> values; // kFeatureNames order
};

/// Building features from footprints within 500 m (heights 0 and closest distance 500 when none)
/// plus winter-solstice shadow minutes.
std::vector<SiteFeatures> site_features(const geo::CityModel& city, const CivilDate& solstice);

struct PsmPrediction {
    regression::FitResult logistic; // any episode, all sites
    regression::FitResult linear;   // total seconds in PSM, sites with an episode
};

PsmPrediction predict_psm(const std::vector<SiteFeatures>& features, const std::vector<bool>& psm_flags,
                          const std::vector<double>& psm_durations_s);

} // namespace sensim::analysis
