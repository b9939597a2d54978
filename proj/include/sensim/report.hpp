// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensim/analysis.hpp"

namespace sensim::report {

struct AnalysisOptions {
    bool clean = true;
    int sampling_interval_s = 300;
    int delay_threshold_s = 30;
    std::size_t top_k = 10;
    analysis::TemporalOptions temporal;
    std::optional<CivilDate> solstice; // default: December 21 of the first sample's year
    radio::RadioParams radio;
    analysis::RelocationOptions relocation;
};

struct NetworkKpis {
    std::optional<double> median_rss;
    std::optional<int> median_latency;
    std::optional<int> latency_q1;
    std::optional<int> latency_q3;
    std::size_t low_signal_nodes = 0; // connected nodes with median RSS <= -100 dBm
};

struct AnalysisResult {
    std::size_t input_rows = 0;
    std::size_t rows = 0;
    analysis::CleanReport clean;
    bool cleaned = false;
    NetworkKpis network;
    std::vector<analysis::LatencyRow> latency;
    std::vector<analysis::NodeSummary> nodes;
    std::vector<std::string> dead;
    std::vector<std::optional<geo::NodeSite>> relocated; // parallel to dead
    analysis::ForensicsResult forensics;
    analysis::DistanceComparison distance;
    std::size_t site_count = 0;
    std::optional<analysis::PsmStats> psm;
    std::vector<std::string> winter_psm;
    std::vector<analysis::GroupShare> delayed_by_date;
    std::vector<analysis::GroupShare> delayed_by_node;
    std::vector<analysis::GroupShare> delayed_by_tower;
    std::vector<analysis::TemporalCorrelation> temporal;
    std::vector<analysis::EquityReport> equity;
    CivilDate solstice;
    std::vector<analysis::SiteFeatures> features;
    std::vector<int> solstice_daylight_minutes; // parallel to features
    std::optional<analysis::PsmPrediction> prediction;
    std::vector<radio::IciCandidate> ici;
};

/// Runs every analysis over one ledger. Episodes are optional; without them the PSM sections are empty.
AnalysisResult analyze(ledger::Ledger ledger, const geo::CityModel& city,
                       const std::optional<std::vector<power::PsmEpisode>>& episodes, const AnalysisOptions& options);

/// CSV tables plus summary.json. `manifest` is merged into summary.json under "manifest".
void write_analysis(const AnalysisResult& result, const std::string& dir, const nlohmann::json& manifest = {});

/// Reads an analysis directory and writes report.md and delayed_by_date.svg to `out_dir`.
/// Throws std::runtime_error when the directory lacks summary.json.
void write_report(const std::string& analysis_dir, const std::string& out_dir);

/// Shortest round-trip decimal for finite values, empty for missing or non-finite ones.
std::string num(std::optional<double> v);

} // namespace sensim::report
