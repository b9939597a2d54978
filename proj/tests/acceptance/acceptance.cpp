// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance run: one PASS/FAIL line per criterion. The exit code is the number of failures.
// The default-scenario criteria drive the real command-line pipeline twice and read its files.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sensim/analysis.hpp"
#include "sensim/engine.hpp"
#include "sensim/geo_json.hpp"
#include "sensim/regression.hpp"
#include "sensim/report.hpp"
#include "sensim/solar.hpp"

using namespace sensim;
namespace fs = std::filesystem;

namespace {

// Tolerances. Changing any of these changes what "accepted" means.
constexpr double kLat = 41.88;
constexpr double kLon = -87.63;
constexpr double kWinterDaylightMin = 546, kSummerDaylightMin = 915, kDaylightTolMin = 10;
constexpr double kLifetimeDays = 15, kLifetimeTolDays = 2;
constexpr double kLoadMa = 4, kLoadRelTol = 0.25;
constexpr double kSimEntryRelTol = 0.05; // sim PSM entry versus the analytic drain time
constexpr double kSimBudgetS = 5;
constexpr int kHysteresisRuns = 50;
constexpr double kRowsLo = 8.0e6, kRowsHi = 10.5e6;
constexpr double kMedianRss = -87, kMedianRssTol = 5;
constexpr double kNodeRssLo = -115, kNodeRssHi = -55;
constexpr int kMedianLatency = 5;
constexpr int kIqrLo = 4 - 1, kIqrHi = 6 + 1;
constexpr double kP10 = 7.24, kP60 = 0.88, kPFactor = 2;
constexpr double kDeadLo = 7, kDeadHi = 12;
constexpr double kWinterPsmLo = 22, kWinterPsmHi = 52;
constexpr double kForensicsP = 0.05, kDistanceP = 0.1;
constexpr int kDelayThresholdS = 30;
constexpr double kTop5DelayedMin = 50, kTop5RowsMax = 5, kNoOutageDelayedMax = 0.1;
constexpr int kLosCases = 1000, kShadowCases = 100, kGradientPoints = 10;
constexpr double kGradientTol = 1e-5;
constexpr double kNullRho = 0.05, kNullP = 0.05, kPlantedP = 0.01, kPlantedAmplitudeDb = 10;

OutageRule window_rule(const std::string& tower, UnixMs start, UnixMs end) {
    OutageRule r;
    r.tower_id = tower;
    r.window = TimeWindow{start, end};
    return r;
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Command-line pipeline

std::string g_cli = SENSIM_CLI_PATH;

void sh(const fs::path& cwd, const std::string& args) {
    const std::string cmd = "cd \"" + cwd.string() + "\" && \"" + g_cli + "\" " + args + " >>pipeline.log 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw std::runtime_error("pipeline step failed: sensim " + args + " (see " + (cwd / "pipeline.log").string() +
                                 ")");
    }
}

// gen-city, scenario, simulate, analyze, report. Every path is relative to `dir`.
void run_pipeline(const fs::path& dir, std::uint64_t analysis_seed) {
    fs::create_directories(dir);
    sh(dir, "default-config -o gen.json");
    sh(dir, "gen-city gen.json -o city.json");
    sh(dir, "default-scenario --city-file city.json -o scenario.json");
    sh(dir, "simulate scenario.json -o run");
    sh(dir, "analyze run/ledger.csv city.json --scenario scenario.json --seed " + std::to_string(analysis_seed) +
                " -o analysis");
    sh(dir, "report analysis");
}

bool same_bytes(const fs::path& a, const fs::path& b) {
    if (fs::file_size(a) != fs::file_size(b)) {
        return false;
    }
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::vector<char> ba(1 << 20), bb(1 << 20);
    while (fa && fb) {
        fa.read(ba.data(), std::streamsize(ba.size()));
        fb.read(bb.data(), std::streamsize(bb.size()));
        if (fa.gcount() != fb.gcount() || !std::equal(ba.begin(), ba.begin() + fa.gcount(), bb.begin())) {
            return false;
        }
    }
    return true;
}

std::set<fs::path> tree(const fs::path& root) {
    std::set<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().filename() != "pipeline.log") {
            out.insert(fs::relative(e.path(), root));
        }
    }
    return out;
}

struct Pipeline {
    ScenarioConfig scenario;
    ledger::Ledger cleaned;
    std::vector<power::PsmEpisode> episodes;
    report::AnalysisResult result;
    report::AnalysisOptions options;
    std::size_t raw_rows = 0;
    Verdict determinism;
};

Pipeline load_pipeline(const fs::path& work) {
    Pipeline p;
    const fs::path first = work / "first";
    const fs::path dir = work / "pipeline";
    fs::remove_all(first);
    fs::remove_all(dir);

    const std::uint64_t seed = default_scenario().master_seed;
    run_pipeline(dir, seed);
    fs::rename(dir, first);
    run_pipeline(dir, seed);

    // Determinism: the two trees must match file for file, byte for byte.
    const auto ta = tree(first);
    const auto tb = tree(dir);
    std::size_t differing = 0;
    std::string first_diff;
    for (const auto& f : ta) {
        if (!tb.count(f) || !same_bytes(first / f, dir / f)) {
            ++differing;
            first_diff = first_diff.empty() ? f.string() : first_diff;
        }
    }
    p.determinism.pass = ta == tb && differing == 0 && tb.count("run/ledger.csv") && tb.count("analysis/report.md");
    p.determinism.detail = std::to_string(ta.size()) + " files compared (city, scenario, ledger, events, PSM, "
                           "analysis tables, report.md), " +
                           std::to_string(differing) + " differ" + (first_diff.empty() ? "" : " e.g. " + first_diff);
    fs::remove_all(first);

    p.scenario = load_scenario((dir / "scenario.json").string());
    ledger::Ledger raw = ledger::read_ledger((dir / "run" / "ledger.csv").string());
    p.raw_rows = raw.rows.size();
    p.episodes = power::read_psm_csv((dir / "run" / "psm.csv").string());
    p.options.temporal.seed = seed; // same as the analyze step above
    p.options.radio = p.scenario.radio;
    p.options.sampling_interval_s = p.scenario.sampling_interval_s;
    p.options.delay_threshold_s = kDelayThresholdS;
    p.cleaned = raw;
    analysis::clean_in_place(p.cleaned, p.scenario.city);
    p.result = report::analyze(std::move(raw), p.scenario.city, p.episodes, p.options);
    return p;
}

// ---------------------------------------------------------------------------
// Criteria

Verdict c1_solar() {
    const double winter = solar::daylight_duration(kLat, {2021, 12, 21});
    const double summer = solar::daylight_duration(kLat, {2021, 6, 21});
    Verdict v;
    v.pass = std::abs(winter - kWinterDaylightMin) <= kDaylightTolMin &&
             std::abs(summer - kSummerDaylightMin) <= kDaylightTolMin;
    v.detail = "winter " + fmt("%.1f", winter) + " min, summer " + fmt("%.1f", summer) + " min";
    return v;
}

Verdict c2_battery() {
    const power::PowerParams p;
    double mean_latency = 0;
    for (const auto& m : radio::default_latency_pmf()) {
        mean_latency += m.seconds * m.probability;
    }
    const double load = power::average_load(p, 300, mean_latency);
    const double lifetime_days = p.usable_capacity_mah() / load / 24.0;

    // A single node with no harvest; it enters power saving once 85% of the pack is gone.
    ScenarioConfig c = smoke_scenario(1);
    c.duration_days = 20;
    c.event_log = EventLogLevel::None;
    engine::RunOptions opt;
    opt.harvest_override = [](std::size_t, UnixMs, double) { return 0.0; };
    std::optional<UnixMs> entry;
    opt.trace = [&](const engine::TraceEvent& e) {
        if (e.kind == engine::EventKind::PsmEnter && !entry) {
            entry = e.t;
        }
    };
    const auto t0 = std::chrono::steady_clock::now();
    engine::run(c, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double expected_entry_days = lifetime_days * (1 - p.psm_enter_pct / 100.0);
    const double entry_days = entry ? double(*entry - c.start) / double(kMsPerDay) : -1;

    Verdict v;
    v.pass = std::abs(lifetime_days - kLifetimeDays) <= kLifetimeTolDays &&
             std::abs(load - kLoadMa) <= kLoadRelTol * kLoadMa && entry &&
             std::abs(entry_days - expected_entry_days) <= kSimEntryRelTol * expected_entry_days && secs < kSimBudgetS;
    v.detail = "average load " + fmt("%.3f", load) + " mA, lifetime " + fmt("%.2f", lifetime_days) +
               " d; 20-day sim enters PSM at " + fmt("%.2f", entry_days) + " d (analytic " +
               fmt("%.2f", expected_entry_days) + " d) in " + fmt("%.2f", secs) + " s";
    return v;
}

Verdict c3_hysteresis() {
    const power::PowerParams p;
    std::size_t violations = 0, enters = 0, exits = 0, samples = 0;
    for (int seed = 0; seed < kHysteresisRuns; ++seed) {
        ScenarioConfig c = smoke_scenario(1);
        c.duration_days = 30;
        c.master_seed = std::uint64_t(1000 + seed);
        c.event_log = EventLogLevel::None;
        c.power.nominal_capacity_mah = 200; // a small pack crosses both thresholds many times
        Rng rng = substream(std::uint64_t(seed), "adversarial-harvest");
        c.initial_battery_pct = uniform(rng, 5, 100);
        // Piecewise harvest: darkness, bursts and fast square waves that hover around the thresholds.
        struct Segment {
            UnixMs end;
            int kind;
            double level;
            UnixMs period;
        };
        std::vector<Segment> segs;
        UnixMs t = c.start;
        while (t < c.end()) {
            t += UnixMs(uniform(rng, 10.0 / 1440, 1.0) * double(kMsPerDay));
            segs.push_back({t, int(uniform(rng, 0, 3)), uniform(rng, 0, 0.3),
                            UnixMs(uniform(rng, 2, 90)) * kMsPerMinute});
        }
        engine::RunOptions opt;
        opt.harvest_override = [&](std::size_t, UnixMs at, double) {
            const auto it = std::upper_bound(segs.begin(), segs.end(), at,
                                             [](UnixMs x, const Segment& s) { return x < s.end; });
            if (it == segs.end()) {
                return 0.0;
            }
            switch (it->kind) {
            case 0:
                return 0.0;
            case 1:
                return it->level;
            default:
                return (at / it->period) % 2 == 0 ? it->level : 0.0;
            }
        };
        power::Mode mode = c.initial_battery_pct <= p.psm_enter_pct ? power::Mode::Psm : power::Mode::Active;
        bool seen_any = false;
        opt.trace = [&](const engine::TraceEvent& e) {
            if (!seen_any) {
                seen_any = true;
                mode = e.mode == power::Mode::Psm && e.kind != engine::EventKind::PsmEnter ? power::Mode::Psm : mode;
            }
            switch (e.kind) {
            case engine::EventKind::PsmEnter:
                ++enters;
                violations += e.battery_pct > p.psm_enter_pct;
                mode = power::Mode::Psm;
                break;
            case engine::EventKind::PsmExit:
                ++exits;
                violations += e.battery_pct < p.psm_exit_pct;
                mode = power::Mode::Active;
                break;
            case engine::EventKind::Sample:
                ++samples;
                violations += mode != power::Mode::Active || e.mode != power::Mode::Active;
                break;
            default:
                break;
            }
        };
        engine::run(c, opt);
    }
    Verdict v;
    v.pass = violations == 0 && enters > 0 && exits > 0;
    v.detail = std::to_string(kHysteresisRuns) + " runs, " + std::to_string(enters) + " entries, " +
               std::to_string(exits) + " exits, " + std::to_string(samples) + " samples, " +
               std::to_string(violations) + " violations";
    return v;
}

Verdict c4_reboot() {
    ScenarioConfig c = smoke_scenario(1);
    c.duration_days = 3;
    c.event_log = EventLogLevel::None;
    const UnixMs d0 = c.start;
    c.outages.push_back(window_rule("T001", d0 + 2 * kMsPerHour, d0 + 6 * kMsPerHour));                 // many reboots
    c.outages.push_back(window_rule("T001", d0 + kMsPerDay + 10 * kMsPerHour,
                                            d0 + kMsPerDay + 10 * kMsPerHour + 40 * kMsPerMinute)); // 8 failures
    c.outages.push_back(window_rule("T001", d0 + 2 * kMsPerDay + 12 * kMsPerHour,
                                            d0 + 2 * kMsPerDay + 12 * kMsPerHour + 52 * kMsPerMinute)); // 10+
    engine::RunOptions opt;
    int run = 0, bad = 0, reboots = 0;
    std::vector<UnixMs> reboot_times, success_times;
    std::multiset<UnixMs> sample_times;
    opt.trace = [&](const engine::TraceEvent& e) {
        switch (e.kind) {
        case engine::EventKind::ConnectFail:
            bad += ++run > firmware::kMaxRetries;
            break;
        case engine::EventKind::ConnectSuccess:
            run = 0;
            success_times.push_back(e.t);
            break;
        case engine::EventKind::Reboot:
            ++reboots;
            bad += run != firmware::kMaxRetries;
            run = 0;
            reboot_times.push_back(e.t);
            break;
        case engine::EventKind::Sample:
            sample_times.insert(e.t);
            break;
        default:
            break;
        }
    };
    const auto out = engine::run(c, opt);

    // No reading is taken between a reboot and the next successful connection.
    int gated = 0;
    for (UnixMs r : reboot_times) {
        const auto ok = std::upper_bound(success_times.begin(), success_times.end(), r);
        const UnixMs until = ok == success_times.end() ? c.end() : *ok;
        for (const auto& row : out.ledger.rows) {
            gated += row.sample_time > r && row.sample_time < until;
        }
    }
    // Flushes keep order and the original sample times.
    int order = 0, unknown_time = 0, delayed = 0;
    for (std::size_t i = 0; i < out.ledger.rows.size(); ++i) {
        const auto& row = out.ledger.rows[i];
        if (i > 0) {
            const auto& prev = out.ledger.rows[i - 1];
            order += row.arrival_time < prev.arrival_time ||
                     (row.arrival_time == prev.arrival_time && row.sample_time <= prev.sample_time);
        }
        const auto it = sample_times.find(row.sample_time);
        if (it == sample_times.end()) {
            ++unknown_time;
        } else {
            sample_times.erase(it);
        }
        delayed += row.latency_s >= 300;
    }
    Verdict v;
    v.pass = reboots > 0 && bad == 0 && gated == 0 && order == 0 && unknown_time == 0 && delayed > 0;
    v.detail = std::to_string(reboots) + " reboots, " + std::to_string(bad) + " not at the 10th failure, " +
               std::to_string(gated) + " readings while gated, " + std::to_string(order) + " out of order, " +
               std::to_string(unknown_time) + " rewritten timestamps, " + std::to_string(delayed) +
               " buffered rows delivered";
    return v;
}

Verdict c5_calibration(const Pipeline& p) {
    const auto& r = p.result;
    std::vector<std::string> parts;
    bool ok = true;
    const auto check = [&](const char* tag, bool pass, const std::string& what) {
        ok = ok && pass;
        parts.push_back(std::string(tag) + (pass ? " ok " : " FAIL ") + what);
    };
    check("(a)", double(p.raw_rows) >= kRowsLo && double(p.raw_rows) <= kRowsHi,
          std::to_string(p.raw_rows) + " rows");

    double lo = 0, hi = -1e9;
    bool first = true;
    for (const auto& n : r.nodes) {
        if (n.never_connected()) {
            continue;
        }
        lo = first ? n.median_rss : std::min(lo, n.median_rss);
        hi = first ? n.median_rss : std::max(hi, n.median_rss);
        first = false;
    }
    const double med = r.network.median_rss.value_or(0);
    check("(b)", r.network.median_rss && std::abs(med - kMedianRss) <= kMedianRssTol && lo >= kNodeRssLo &&
                     hi <= kNodeRssHi,
          "median " + fmt("%.0f", med) + " dBm, connected nodes " + fmt("%.0f", lo) + ".." + fmt("%.0f", hi));

    double p10 = -1, p60 = -1;
    for (const auto& row : r.latency) {
        p10 = row.threshold_s == 10 ? row.pct : p10;
        p60 = row.threshold_s == 60 ? row.pct : p60;
    }
    const int q1 = r.network.latency_q1.value_or(-1), q3 = r.network.latency_q3.value_or(-1);
    check("(c)", r.network.median_latency == kMedianLatency && q1 >= kIqrLo && q3 <= kIqrHi &&
                     p10 >= kP10 / kPFactor && p10 <= kP10 * kPFactor && p60 >= kP60 / kPFactor &&
                     p60 <= kP60 * kPFactor,
          "median " + std::to_string(r.network.median_latency.value_or(-1)) + " s, IQR " + std::to_string(q1) + "-" +
              std::to_string(q3) + " s, P(>=10) " + fmt("%.2f", p10) + "%, P(>=60) " + fmt("%.2f", p60) + "%");

    const double dead_pct = 100.0 * double(r.dead.size()) / double(r.site_count);
    check("(d)", dead_pct >= kDeadLo && dead_pct <= kDeadHi,
          std::to_string(r.dead.size()) + "/" + std::to_string(r.site_count) + " dead (" + fmt("%.2f", dead_pct) + "%)");

    const double winter_pct = 100.0 * double(r.winter_psm.size()) / double(r.site_count);
    check("(e)", winter_pct >= kWinterPsmLo && winter_pct <= kWinterPsmHi,
          std::to_string(r.winter_psm.size()) + " winter PSM devices (" + fmt("%.2f", winter_pct) + "%)");

    // Recomputed from the episode file rather than trusted from the analysis.
    std::int64_t total_ms = 0;
    for (const auto& e : p.episodes) {
        total_ms += e.end - e.start;
    }
    const std::int64_t expect = total_ms / (300 * kMsPerSecond);
    check("(f)", r.psm && r.psm->lost_readings_estimate == expect,
          std::to_string(r.psm ? r.psm->lost_readings_estimate : -1) + " lost = floor(" +
              std::to_string(total_ms / 1000) + " s / 300)");

    Verdict v;
    v.pass = ok;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        v.detail += (i ? "; " : "") + parts[i];
    }
    return v;
}

Verdict c6_forensics(const Pipeline& p) {
    const auto& f = p.result.forensics;
    const auto& d = p.result.distance;
    Verdict v;
    v.pass = !f.pairs.empty() && f.test.p < kForensicsP && d.test.p > kDistanceP;
    v.detail = std::to_string(f.pairs.size()) + " relocated pairs, tallest-within-100 m p = " + fmt("%.4f", f.test.p) +
               "; dead vs healthy tower distance p = " + fmt("%.3f", d.test.p);
    return v;
}

Verdict c7_delays(const Pipeline& p) {
    const auto top = analysis::top_share(p.result.delayed_by_date, 5);

    ScenarioConfig quiet = p.scenario;
    quiet.outages.clear();
    for (auto& t : quiet.city.towers) {
        t.outages.clear();
    }
    quiet.event_log = EventLogLevel::None;
    auto out = engine::run(quiet);
    analysis::clean_in_place(out.ledger, quiet.city);
    std::size_t delayed = 0;
    for (const auto& row : out.ledger.rows) {
        delayed += row.latency_s >= kDelayThresholdS;
    }
    const double quiet_pct = 100.0 * double(delayed) / double(std::max<std::size_t>(1, out.ledger.rows.size()));

    Verdict v;
    v.pass = top.delayed_pct >= kTop5DelayedMin && top.total_pct < kTop5RowsMax && quiet_pct < kNoOutageDelayedMax;
    v.detail = "top-5 dates hold " + fmt("%.2f", top.delayed_pct) + "% of >=30 s rows and " +
               fmt("%.2f", top.total_pct) + "% of all rows; without outages " + std::to_string(delayed) + " of " +
               std::to_string(out.ledger.rows.size()) + " rows (" + fmt("%.4f", quiet_pct) + "%) are delayed";
    return v;
}

Verdict c8_cleaning() {
    ledger::Ledger l = fixture::cleaning_fixture();
    const auto r = analysis::clean_in_place(l, fixture::two_zone_city());
    analysis::CleanReport want;
    want.kept_count = 10;
    want.dropped_no_connectivity = 2;
    want.dropped_zero_signal = 3;
    want.dropped_out_of_bounds_tower = 1;
    want.dropped_delay_gt_24h = 4;
    want.flagged_unknown_tower = 2;
    const bool boundary = std::any_of(l.rows.begin(), l.rows.end(), [](const auto& row) {
        return row.latency_s == analysis::kMaxLatencyS;
    });
    Verdict v;
    v.pass = r == want && boundary;
    v.detail = "kept " + std::to_string(r.kept_count) + ", dropped " + std::to_string(r.dropped_no_connectivity) + "/" +
               std::to_string(r.dropped_zero_signal) + "/" + std::to_string(r.dropped_out_of_bounds_tower) + "/" +
               std::to_string(r.dropped_delay_gt_24h) + ", flagged " + std::to_string(r.flagged_unknown_tower) +
               ", 86400 s row " + (boundary ? "kept" : "dropped");
    return v;
}

Verdict c9_oracles() {
    Rng rng(2021);
    int los_bad = 0, los_blocked = 0;
    for (int i = 0; i < kLosCases; ++i) {
        const auto c = oracle::random_los_case(rng);
        const auto got = geo::los_blocked(c.node, c.tower, c.buildings);
        const auto want = oracle::sampled_los(c.node, c.tower, c.buildings, 0.01);
        los_bad += got.blocked != want.blocked;
        los_blocked += want.blocked;
    }
    int shadow_bad = 0;
    long shadow_total = 0;
    for (int i = 0; i < kShadowCases; ++i) {
        const auto c = oracle::random_shadow_case(rng);
        const int got = solar::shadow_minutes(kLat, kLon, c.site, c.date, solar::OccluderSet{c.buildings, c.trees});
        const int want = oracle::minute_scan_shadow(kLat, kLon, c.site, c.date, c.buildings, c.trees);
        shadow_bad += got != want;
        shadow_total += want;
    }
    double worst = 0;
    Eigen::MatrixXd x(50, 3);
    Eigen::VectorXd yb(50), yc(50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 3; ++j) {
            x(i, j) = uniform(rng, -2, 2);
        }
        yb[i] = uniform01(rng) < 0.5 ? 1 : 0;
        yc[i] = uniform(rng, -5, 5);
    }
    for (int k = 0; k < kGradientPoints; ++k) {
        Eigen::VectorXd beta(4);
        for (int j = 0; j < 4; ++j) {
            beta[j] = uniform(rng, -1.5, 1.5);
        }
        worst = std::max(worst, oracle::gradient_mismatch(
                                    [&](const Eigen::VectorXd& b) { return regression::logistic_nll(b, x, yb); },
                                    [&](const Eigen::VectorXd& b) { return regression::logistic_nll_gradient(b, x, yb); },
                                    beta));
        worst = std::max(worst, oracle::gradient_mismatch(
                                    [&](const Eigen::VectorXd& b) { return regression::ols_loss(b, x, yc); },
                                    [&](const Eigen::VectorXd& b) { return regression::ols_loss_gradient(b, x, yc); },
                                    beta));
    }
    Verdict v;
    v.pass = los_bad == 0 && shadow_bad == 0 && worst < kGradientTol;
    v.detail = "LOS " + std::to_string(los_bad) + "/" + std::to_string(kLosCases) + " disagree (" +
               std::to_string(los_blocked) + " blocked); shadow " + std::to_string(shadow_bad) + "/" +
               std::to_string(kShadowCases) + " disagree (" + std::to_string(shadow_total) +
               " shaded minutes); worst gradient error " + fmt("%.2e", worst);
    return v;
}

Verdict c11_temporal(const Pipeline& p) {
    std::size_t failing = 0, defined = 0;
    std::string worst;
    double worst_rho = 0;
    for (const auto& t : p.result.temporal) {
        if (!t.result.rho) {
            continue;
        }
        ++defined;
        const bool ok = std::abs(*t.result.rho) < kNullRho && *t.result.p > kNullP;
        failing += !ok;
        if (std::abs(*t.result.rho) >= std::abs(worst_rho)) {
            worst_rho = *t.result.rho;
            worst = t.target + "~" + t.feature + " rho " + fmt("%.4f", *t.result.rho) + " p " +
                    fmt("%.4f", *t.result.p) + " (Holm " + fmt("%.4f", t.p_holm.value_or(1)) + ")";
        }
    }

    ledger::Ledger planted = p.cleaned;
    analysis::plant_diurnal_rss(planted, kPlantedAmplitudeDb, p.options.temporal.utc_offset_h);
    UnixMs lo = planted.rows.front().sample_time, hi = lo;
    for (const auto& row : planted.rows) {
        lo = std::min(lo, row.sample_time);
        hi = std::max(hi, row.sample_time);
    }
    const auto weather = analysis::synthetic_weather(lo, hi + 1, p.options.temporal.seed);
    std::optional<double> planted_p;
    for (const auto& t : analysis::temporal_null_check(planted, weather, p.options.temporal)) {
        if (t.target == "rss_dbm" && t.feature == "hour_of_day") {
            planted_p = t.p_holm;
        }
    }
    Verdict v;
    v.pass = defined > 0 && failing == 0 && planted_p && *planted_p < kPlantedP;
    v.detail = std::to_string(failing) + " of " + std::to_string(defined) + " null checks fail; largest " + worst +
               "; planted " + fmt("%.0f", kPlantedAmplitudeDb) + " dB diurnal ramp Holm p = " +
               fmt("%.4f", planted_p.value_or(1));
    return v;
}

Verdict c12_equity(const Pipeline& p) {
    const auto crafted = analysis::equity_report("crafted", {"A0", "A1", "B0", "B1", "B2"}, fixture::two_zone_city());
    const bool exact = crafted.issue.n == 5 && crafted.issue.disadvantaged == 2.0 / 5.0 &&
                       crafted.issue.majority_minority == 2.0 / 5.0 && crafted.baseline.disadvantaged == 0.5 &&
                       crafted.baseline.majority_minority == 0.5;

    std::vector<std::string> psm_sites;
    if (p.result.psm) {
        for (const auto& [id, ms] : p.result.psm->per_device_ms) {
            psm_sites.push_back(id);
        }
    }
    const auto dead = analysis::equity_report("dead", p.result.dead, p.scenario.city);
    const auto psm = analysis::equity_report("psm", psm_sites, p.scenario.city);
    const auto above = [](const analysis::EquityReport& r) {
        return r.issue.disadvantaged && r.baseline.disadvantaged && *r.issue.disadvantaged > *r.baseline.disadvantaged;
    };
    Verdict v;
    v.pass = exact && above(dead) && above(psm);
    v.detail = std::string("crafted city ") + (exact ? "exact" : "MISMATCH") + "; disadvantaged share dead " +
               fmt("%.3f", dead.issue.disadvantaged.value_or(-1)) + " (n=" + std::to_string(dead.issue.n) + "), PSM " +
               fmt("%.3f", psm.issue.disadvantaged.value_or(-1)) + " (n=" + std::to_string(psm.issue.n) +
               "), all sites " + fmt("%.3f", dead.baseline.disadvantaged.value_or(-1));
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensim acceptance criteria"};
    std::string work = (fs::temp_directory_path() / "sensim-acceptance").string();
    std::string report_path;
    bool keep = false;
    app.add_option("--work-dir", work, "Scratch directory for the pipeline runs");
    app.add_option("--cli", g_cli, "sensim executable");
    app.add_flag("--keep", keep, "Keep the pipeline outputs");
    app.add_option("--report", report_path, "Also write the verdict lines to this file");
    CLI11_PARSE(app, argc, argv);

    std::string lines;
    const auto emit = [&](const std::string& line) {
        std::fputs(line.c_str(), stdout);
        std::fflush(stdout);
        lines += line;
    };

    int failures = 0;
    int evaluated = 0;
    std::optional<Pipeline> pipeline;
    std::string pipeline_error;
    const auto need_pipeline = [&]() -> const Pipeline* {
        if (!pipeline && pipeline_error.empty()) {
            try {
                pipeline = load_pipeline(work);
            } catch (const std::exception& e) {
                pipeline_error = e.what();
            }
        }
        return pipeline ? &*pipeline : nullptr;
    };
    const auto report = [&](int id, const char* name, const std::function<Verdict()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = f();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++evaluated;
        failures += !v.pass;
        char head[64];
        std::snprintf(head, sizeof head, "C%-2d %s  %-22s ", id, v.pass ? "PASS" : "FAIL", name);
        emit(head + v.detail + fmt("  [%.1f s]\n", secs));
    };
    const auto with_pipeline = [&](Verdict (*f)(const Pipeline&)) {
        return [&, f]() -> Verdict {
            const Pipeline* p = need_pipeline();
            if (!p) {
                return {false, "pipeline failed: " + pipeline_error};
            }
            return f(*p);
        };
    };

    report(1, "solar geometry", c1_solar);
    report(2, "battery lifetime", c2_battery);
    report(3, "PSM hysteresis", c3_hysteresis);
    report(4, "retry and reboot", c4_reboot);
    report(5, "default calibration", with_pipeline(c5_calibration));
    report(6, "dead-zone forensics", with_pipeline(c6_forensics));
    report(7, "delay clustering", with_pipeline(c7_delays));
    report(8, "cleaning fixture", c8_cleaning);
    report(9, "oracle equivalence", c9_oracles);
    report(10, "determinism", with_pipeline([](const Pipeline& p) { return p.determinism; }));
    report(11, "temporal null", with_pipeline(c11_temporal));
    report(12, "equity accounting", with_pipeline(c12_equity));

    if (!keep) {
        std::error_code ec;
        fs::remove_all(fs::path(work) / "pipeline", ec);
    }
    emit("acceptance: " + std::to_string(evaluated) + " criteria evaluated, " + std::to_string(evaluated - failures) +
         " passed, " + std::to_string(failures) + " failed\n");
    if (!report_path.empty()) {
        std::ofstream(report_path) << lines;
    }
    return failures;
}
