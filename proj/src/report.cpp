// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sensim/solar.hpp"

namespace sensim::report {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) {
        return {};
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, *v == 0.0 ? 0.0 : *v);
    return {buf, r.ptr};
}

namespace {

json opt(std::optional<double> v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
        if (!out_) {
            throw std::runtime_error("cannot write '" + path.string() + "'");
        }
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string str(std::size_t v) { return std::to_string(v); }

/// Order statistic at fraction q with the lower convention (q = 0.5 is the lower median).
template <class T>
std::optional<T> lower_quantile(std::vector<T>& v, double q) {
    if (v.empty()) {
        return std::nullopt;
    }
    const auto k = std::size_t(std::floor(q * double(v.size() - 1)));
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
    return v[k];
}

std::vector<std::string> top_decile(const std::vector<analysis::NodeSummary>& nodes,
                                    double (*score)(const analysis::NodeSummary&)) {
    std::vector<const analysis::NodeSummary*> live;
    for (const auto& n : nodes) {
        if (n.reading_count > 0) {
            live.push_back(&n);
        }
    }
    std::stable_sort(live.begin(), live.end(), [&](const auto* a, const auto* b) {
        const double sa = score(*a);
        const double sb = score(*b);
        return sa != sb ? sa > sb : a->node_id < b->node_id;
    });
    const std::size_t k = (live.size() + 9) / 10;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(live[i]->node_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

json fit_json(const regression::FitResult& f) {
    return {{"converged", f.converged},
            {"separation", f.separation},
            {"iterations", f.iterations},
            {"objective", opt(f.objective)},
            {"r_squared", opt(f.r_squared)},
            {"dropped", f.dropped},
            {"note", f.note}};
}

json share_json(const analysis::TopShare& s) { return {{"delayed_pct", s.delayed_pct}, {"total_pct", s.total_pct}}; }

} // namespace

AnalysisResult analyze(ledger::Ledger ledger, const geo::CityModel& city,
                       const std::optional<std::vector<power::PsmEpisode>>& episodes, const AnalysisOptions& options) {
    AnalysisResult r;
    r.input_rows = ledger.rows.size();
    if (options.clean) {
        r.clean = analysis::clean_in_place(ledger, city);
        r.cleaned = true;
    }
    r.rows = ledger.rows.size();
    r.site_count = city.sites.size();

    {
        std::vector<float> rss;
        std::vector<std::int32_t> lat;
        rss.reserve(ledger.rows.size());
        lat.reserve(ledger.rows.size());
        for (const auto& row : ledger.rows) {
            if (row.has_rss()) {
                rss.push_back(row.rss_dbm);
            }
            lat.push_back(row.latency_s);
        }
        if (auto m = lower_quantile(rss, 0.5)) {
            r.network.median_rss = double(*m);
        }
        if (!lat.empty()) {
            r.network.latency_q1 = *lower_quantile(lat, 0.25);
            r.network.median_latency = *lower_quantile(lat, 0.5);
            r.network.latency_q3 = *lower_quantile(lat, 0.75);
        }
    }
    r.latency = analysis::latency_table(ledger);

    std::vector<std::string> site_ids;
    for (const auto& s : city.sites) {
        site_ids.push_back(s.id);
    }
    r.nodes = analysis::node_summaries(ledger, site_ids);
    for (const auto& n : r.nodes) {
        r.network.low_signal_nodes += !n.never_connected() && n.median_rss <= -100.0 ? 1 : 0;
    }
    r.dead = analysis::detect_dead_zones(r.nodes);
    {
        // Forensics only concern sites of this city; foreign ledger nodes are reported elsewhere.
        std::vector<std::string> city_dead;
        for (const auto& id : r.dead) {
            if (city.find_site(id)) {
                city_dead.push_back(id);
            }
        }
        r.dead = city_dead;
    }
    r.relocated = analysis::relocate_dead_sites(city, r.dead, options.radio, options.relocation);
    {
        std::vector<geo::NodeSite> d;
        std::vector<geo::NodeSite> m;
        for (std::size_t i = 0; i < r.dead.size(); ++i) {
            if (r.relocated[i]) {
                d.push_back(*city.find_site(r.dead[i]));
                m.push_back(*r.relocated[i]);
            }
        }
        r.forensics = analysis::dead_vs_relocated(city, d, m);
    }
    r.distance = analysis::distance_comparison(city, r.dead);

    if (episodes) {
        r.psm = analysis::psm_stats(*episodes, options.sampling_interval_s);
        r.winter_psm = analysis::winter_psm_devices(*episodes);
    }

    r.delayed_by_date = analysis::delayed_concentration(ledger, options.delay_threshold_s, analysis::GroupBy::Date);
    r.delayed_by_node = analysis::delayed_concentration(ledger, options.delay_threshold_s, analysis::GroupBy::Node);
    r.delayed_by_tower = analysis::delayed_concentration(ledger, options.delay_threshold_s, analysis::GroupBy::Tower);

    if (!ledger.rows.empty()) {
        UnixMs lo = ledger.rows.front().sample_time;
        UnixMs hi = lo;
        for (const auto& row : ledger.rows) {
            lo = std::min(lo, row.sample_time);
            hi = std::max(hi, row.sample_time);
        }
        const auto weather = analysis::synthetic_weather(lo, hi + 1, options.temporal.seed);
        r.temporal = analysis::temporal_null_check(ledger, weather, options.temporal);
        r.solstice = options.solstice.value_or(CivilDate{to_civil(lo).year, 12, 21});
    } else {
        r.solstice = options.solstice.value_or(CivilDate{2021, 12, 21});
    }

    const auto low_signal = [&] {
        std::vector<std::string> v;
        for (const auto& n : r.nodes) {
            if (!n.never_connected() && n.median_rss <= -100.0) {
                v.push_back(n.node_id);
            }
        }
        return v;
    }();
    // Nodes whose median latency exceeds the network median.
    std::vector<std::string> high_latency;
    for (const auto& n : r.nodes) {
        if (n.median_latency && r.network.median_latency && *n.median_latency > *r.network.median_latency) {
            high_latency.push_back(n.node_id);
        }
    }
    std::vector<std::pair<std::string, std::vector<std::string>>> sets{
        {"dead_zones", r.dead},
        {"low_median_rss", low_signal},
        {"high_latency", high_latency},
        {"most_delayed",
         top_decile(r.nodes, [](const analysis::NodeSummary& n) { return double(n.delayed_count_at[1]); })}};
    if (r.psm) {
        std::vector<std::string> devices;
        for (const auto& [id, ms] : r.psm->per_device_ms) {
            devices.push_back(id);
        }
        sets.emplace_back("psm", devices);
        sets.emplace_back("winter_psm", r.winter_psm);
    }
    for (auto& [name, ids] : sets) {
        std::erase_if(ids, [&](const std::string& id) { return city.find_site(id) == nullptr; });
        r.equity.push_back(analysis::equity_report(name, ids, city));
    }

    if (!city.sites.empty()) {
        r.features = analysis::site_features(city, r.solstice);
        for (std::size_t i = 0; i < city.sites.size(); ++i) {
            r.solstice_daylight_minutes.push_back(
                solar::daylight_minutes_sampled(city.origin_lat, city.origin_lon, r.solstice));
        }
        if (r.psm) {
            std::vector<bool> flags;
            std::vector<double> durations;
            for (const auto& s : city.sites) {
                const auto it = r.psm->per_device_ms.find(s.id);
                flags.push_back(it != r.psm->per_device_ms.end());
                durations.push_back(it != r.psm->per_device_ms.end() ? double(it->second) / 1000.0 : 0.0);
            }
            r.prediction = analysis::predict_psm(r.features, flags, durations);
        }
    }
    r.ici = radio::ici_candidates(city);
    return r;
}

void write_analysis(const AnalysisResult& r, const std::string& dir_name, const json& manifest) {
    const fs::path dir(dir_name);
    fs::create_directories(dir);

    {
        Csv c(dir / "clean_report.csv", {"category", "count"});
        c.row({"input", str(r.input_rows)});
        c.row({"dropped_no_connectivity", str(r.clean.dropped_no_connectivity)});
        c.row({"dropped_zero_signal", str(r.clean.dropped_zero_signal)});
        c.row({"dropped_out_of_bounds_tower", str(r.clean.dropped_out_of_bounds_tower)});
        c.row({"dropped_delay_gt_24h", str(r.clean.dropped_delay_gt_24h)});
        c.row({"kept", str(r.rows)});
        c.row({"flagged_unknown_tower", str(r.clean.flagged_unknown_tower)});
    }
    {
        Csv c(dir / "latency_table.csv", {"min_latency_s", "count", "pct"});
        for (const auto& l : r.latency) {
            char pct[16];
            std::snprintf(pct, sizeof pct, "%.2f", l.pct);
            c.row({std::to_string(l.threshold_s), str(l.count), pct});
        }
    }
    {
        Csv c(dir / "node_summary.csv", {"node_id", "median_rss_dbm", "median_latency_s", "reading_count",
                                         "connected_count", "delayed_10s", "delayed_30s", "delayed_60s"});
        for (const auto& n : r.nodes) {
            c.row({n.node_id, num(n.median_rss),
                   n.median_latency ? std::to_string(*n.median_latency) : std::string(), str(n.reading_count),
                   str(n.connected_count), str(n.delayed_count_at[0]), str(n.delayed_count_at[1]),
                   str(n.delayed_count_at[2])});
        }
    }
    {
        Csv c(dir / "dead_zones.csv", {"dead_id", "dead_tallest_100m", "relocated_id", "relocated_x", "relocated_y",
                                       "relocated_tallest_100m"});
        std::unordered_map<std::string, const analysis::SitePair*> pairs;
        for (const auto& p : r.forensics.pairs) {
            pairs[p.dead_id] = &p;
        }
        for (std::size_t i = 0; i < r.dead.size(); ++i) {
            const auto it = pairs.find(r.dead[i]);
            if (it == pairs.end() || !r.relocated[i]) {
                c.row({r.dead[i], "", "", "", "", ""});
                continue;
            }
            c.row({r.dead[i], num(it->second->dead_tallest), r.relocated[i]->id, num(r.relocated[i]->position.x),
                   num(r.relocated[i]->position.y), num(it->second->relocated_tallest)});
        }
    }
    {
        Csv c(dir / "psm_devices.csv", {"node_id", "total_s", "winter"});
        if (r.psm) {
            for (const auto& [id, ms] : r.psm->per_device_ms) {
                const bool winter = std::binary_search(r.winter_psm.begin(), r.winter_psm.end(), id);
                c.row({id, num(double(ms) / 1000.0), winter ? "1" : "0"});
            }
        }
    }
    const std::vector<std::pair<std::string, const std::vector<analysis::GroupShare>*>> groups{
        {"date", &r.delayed_by_date}, {"node", &r.delayed_by_node}, {"tower", &r.delayed_by_tower}};
    for (const auto& [name, shares] : groups) {
        Csv c(dir / ("delayed_by_" + name + ".csv"), {name, "delayed", "total", "delayed_pct", "total_pct"});
        for (const auto& g : *shares) {
            c.row({g.key, str(g.delayed), str(g.total), num(g.delayed_pct), num(g.total_pct)});
        }
    }
    {
        Csv c(dir / "temporal.csv", {"target", "feature", "n", "rho", "p", "p_holm", "reason"});
        for (const auto& t : r.temporal) {
            c.row({t.target, t.feature, str(t.n), num(t.result.rho), num(t.result.p), num(t.p_holm), t.result.reason});
        }
    }
    {
        Csv c(dir / "equity.csv", {"set", "n", "disadvantaged", "majority_minority", "baseline_n",
                                   "baseline_disadvantaged", "baseline_majority_minority", "reason"});
        for (const auto& e : r.equity) {
            c.row({e.set_name, str(e.issue.n), num(e.issue.disadvantaged), num(e.issue.majority_minority),
                   str(e.baseline.n), num(e.baseline.disadvantaged), num(e.baseline.majority_minority),
                   e.issue.reason});
        }
    }
    {
        Csv c(dir / "shadow_report.csv", {"site_id", "date", "shadow_minutes", "daylight_minutes"});
        const std::string date = to_date_string(r.solstice);
        const auto shadow = std::find(analysis::kFeatureNames.begin(), analysis::kFeatureNames.end(),
                                      std::string("winter_shadow_minutes")) -
                            analysis::kFeatureNames.begin();
        for (std::size_t i = 0; i < r.features.size(); ++i) {
            c.row({r.features[i].site_id, date, num(r.features[i].values[std::size_t(shadow)]),
                   std::to_string(r.solstice_daylight_minutes[i])});
        }
    }
    {
        std::vector<std::string> header{"site_id"};
        header.insert(header.end(), analysis::kFeatureNames.begin(), analysis::kFeatureNames.end());
        Csv c(dir / "site_features.csv", header);
        for (const auto& f : r.features) {
            std::vector<std::string> row{f.site_id};
            for (double v : f.values) {
                row.push_back(num(v));
            }
            c.row(row);
        }
    }
    {
        Csv c(dir / "regression.csv", {"model", "term", "coef", "std_error", "statistic", "p_value"});
        if (r.prediction) {
            for (const auto& [model, fit] : {std::pair{"logistic", &r.prediction->logistic},
                                             std::pair{"linear", &r.prediction->linear}}) {
                for (std::size_t k = 0; k < fit->coef.size(); ++k) {
                    c.row({model, fit->names[k], num(fit->coef[k]), num(fit->std_error[k]), num(fit->statistic[k]),
                           num(fit->p_value[k])});
                }
            }
        }
    }
    {
        Csv c(dir / "ici.csv", {"site_id", "tower_ids", "distances_m"});
        for (const auto& i : r.ici) {
            std::string towers;
            std::string dists;
            for (std::size_t k = 0; k < i.tower_ids.size(); ++k) {
                towers += (k ? ";" : "") + i.tower_ids[k];
                dists += (k ? ";" : "") + num(std::round(i.distances[k] * 10.0) / 10.0);
            }
            c.row({i.site_id, towers, dists});
        }
    }

    std::size_t delayed_rows = 0;
    for (const auto& g : r.delayed_by_date) {
        delayed_rows += g.delayed;
    }
    json s;
    s["manifest"] = manifest;
    s["rows"] = {{"input", r.input_rows}, {"analyzed", r.rows}};
    s["clean"] = r.cleaned ? json{{"kept", r.clean.kept_count},
                                  {"dropped_no_connectivity", r.clean.dropped_no_connectivity},
                                  {"dropped_zero_signal", r.clean.dropped_zero_signal},
                                  {"dropped_out_of_bounds_tower", r.clean.dropped_out_of_bounds_tower},
                                  {"dropped_delay_gt_24h", r.clean.dropped_delay_gt_24h},
                                  {"flagged_unknown_tower", r.clean.flagged_unknown_tower}}
                           : json(nullptr);
    auto opt_int = [](std::optional<int> v) { return v ? json(*v) : json(nullptr); };
    s["network"] = {{"median_rss_dbm", opt(r.network.median_rss)},
                    {"median_latency_s", opt_int(r.network.median_latency)},
                    {"latency_q1_s", opt_int(r.network.latency_q1)},
                    {"latency_q3_s", opt_int(r.network.latency_q3)},
                    {"low_signal_nodes", r.network.low_signal_nodes}};
    s["sites"] = r.site_count;
    std::size_t relocated = 0;
    for (const auto& m : r.relocated) {
        relocated += m ? 1 : 0;
    }
    s["dead_zones"] = {{"count", r.dead.size()},
                       {"fraction", r.site_count ? double(r.dead.size()) / double(r.site_count) : 0.0},
                       {"ids", r.dead},
                       {"relocated", relocated}};
    s["forensics"] = {{"pairs", r.forensics.pairs.size()},
                      {"alternative", "greater"},
                      {"w", r.forensics.test.w},
                      {"u", r.forensics.test.u},
                      {"p", r.forensics.test.p},
                      {"exact", r.forensics.test.exact}};
    s["distance"] = {{"dead_n", r.distance.dead_m.size()},
                     {"healthy_n", r.distance.healthy_m.size()},
                     {"alternative", "two-sided"},
                     {"p", r.distance.test.p},
                     {"exact", r.distance.test.exact}};
    if (r.psm) {
        s["psm"] = {{"episode_count", r.psm->episode_count},
                    {"device_count", r.psm->device_count},
                    {"total_ms", r.psm->total_ms},
                    {"total_s", r.psm->total_s},
                    {"median_len_s", r.psm->median_len_s},
                    {"max_len_s", r.psm->max_len_s},
                    {"min_len_s", r.psm->min_len_s},
                    {"lost_readings_estimate", r.psm->lost_readings_estimate},
                    {"winter_devices", r.winter_psm.size()},
                    {"winter_device_fraction",
                     r.site_count ? double(r.winter_psm.size()) / double(r.site_count) : 0.0}};
    } else {
        s["psm"] = nullptr;
    }
    s["delayed"] = {{"rows", delayed_rows},
                    {"pct_of_rows", r.rows ? 100.0 * double(delayed_rows) / double(r.rows) : 0.0},
                    {"top5_dates", share_json(analysis::top_share(r.delayed_by_date, 5))},
                    {"top5_nodes", share_json(analysis::top_share(r.delayed_by_node, 5))},
                    {"top5_towers", share_json(analysis::top_share(r.delayed_by_tower, 5))}};
    json temporal = json::array();
    for (const auto& t : r.temporal) {
        temporal.push_back({{"target", t.target},
                            {"feature", t.feature},
                            {"n", t.n},
                            {"rho", opt(t.result.rho)},
                            {"p", opt(t.result.p)},
                            {"p_holm", opt(t.p_holm)},
                            {"reason", t.result.reason}});
    }
    s["temporal"] = temporal;
    json equity = json::array();
    for (const auto& e : r.equity) {
        equity.push_back({{"set", e.set_name},
                          {"n", e.issue.n},
                          {"disadvantaged", opt(e.issue.disadvantaged)},
                          {"majority_minority", opt(e.issue.majority_minority)},
                          {"baseline_disadvantaged", opt(e.baseline.disadvantaged)},
                          {"baseline_majority_minority", opt(e.baseline.majority_minority)},
                          {"reason", e.issue.reason}});
    }
    s["equity"] = equity;
    s["solstice"] = to_date_string(r.solstice);
    s["regression"] = r.prediction ? json{{"logistic", fit_json(r.prediction->logistic)},
                                          {"linear", fit_json(r.prediction->linear)}}
                                   : json(nullptr);
    s["ici_candidates"] = r.ici.size();
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << s.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Markdown and SVG

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<std::vector<std::string>> rows;
    if (!in) {
        return rows;
    }
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string fixed(const json& v, int decimals) {
    if (!v.is_number()) {
        return "n/a";
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v.get<double>());
    return buf;
}

std::string fixed(const std::string& v, int decimals) {
    if (v.empty()) {
        return "n/a";
    }
    return fixed(json(std::stod(v)), decimals);
}

std::string pvalue(const json& v) {
    if (!v.is_number()) {
        return "n/a";
    }
    const double p = v.get<double>();
    char buf[32];
    std::snprintf(buf, sizeof buf, p < 1e-4 ? "%.2e" : "%.4f", p);
    return buf;
}

/// Rewrites the given columns (header excluded) with a fixed number of decimals.
std::vector<std::vector<std::string>> rounded(std::vector<std::vector<std::string>> rows,
                                              std::initializer_list<std::size_t> cols, int decimals) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        for (std::size_t k : cols) {
            if (k < rows[i].size()) {
                rows[i][k] = fixed(rows[i][k], decimals);
            }
        }
    }
    return rows;
}

void table(std::ostream& md, const std::vector<std::vector<std::string>>& rows, std::size_t limit) {
    if (rows.empty()) {
        md << "_no data_\n\n";
        return;
    }
    for (std::size_t i = 0; i < rows.size() && i <= limit; ++i) {
        md << '|';
        for (const auto& c : rows[i]) {
            md << ' ' << (c.empty() ? "" : c) << " |";
        }
        md << '\n';
        if (i == 0) {
            md << '|';
            for (std::size_t k = 0; k < rows[0].size(); ++k) {
                md << " --- |";
            }
            md << '\n';
        }
    }
    if (rows.size() == 1) {
        md << "\n_no rows_\n";
    }
    md << '\n';
}

void write_svg(const std::vector<std::vector<std::string>>& dates, const fs::path& path) {
    constexpr double kW = 640;
    constexpr double kH = 480;
    constexpr double kPad = 60;
    double xmax = 1;
    double ymax = 1;
    for (std::size_t i = 1; i < dates.size(); ++i) {
        xmax = std::max(xmax, std::stod(dates[i][4]));
        ymax = std::max(ymax, std::stod(dates[i][3]));
    }
    xmax = std::ceil(xmax * 1.1);
    ymax = std::ceil(ymax * 1.1);
    std::ofstream svg(path, std::ios::binary);
    char buf[256];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    svg << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n"
                  "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n",
                  kPad, kH - kPad, kW - kPad / 2, kH - kPad, kPad, kH - kPad, kPad, kPad / 2);
    svg << buf;
    for (int k = 0; k <= 4; ++k) {
        const double fx = kPad + (kW - 1.5 * kPad) * k / 4.0;
        const double fy = kH - kPad - (kH - 1.5 * kPad) * k / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.0f\" font-size=\"11\" text-anchor=\"middle\">%.2f</text>\n"
                      "<text x=\"%.0f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.0f</text>\n",
                      fx, kH - kPad + 16, xmax * k / 4.0, kPad - 6, fy + 4, ymax * k / 4.0);
        svg << buf;
    }
    svg << "<text x=\"340\" y=\"465\" font-size=\"13\" text-anchor=\"middle\">share of all readings (%)</text>\n";
    svg << "<text x=\"16\" y=\"240\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 240)\">"
           "share of delayed readings (%)</text>\n";
    for (std::size_t i = 1; i < dates.size(); ++i) {
        const double x = kPad + (kW - 1.5 * kPad) * std::stod(dates[i][4]) / xmax;
        const double y = kH - kPad - (kH - 1.5 * kPad) * std::stod(dates[i][3]) / ymax;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\"><title>%s</title></circle>\n",
                      x, y, dates[i][0].c_str());
        svg << buf;
    }
    svg << "</svg>\n";
}

} // namespace

void write_report(const std::string& analysis_dir, const std::string& out_dir) {
    const fs::path in(analysis_dir);
    std::ifstream sf(in / "summary.json");
    if (!sf) {
        throw std::runtime_error("'" + analysis_dir + "' has no summary.json; run analyze first");
    }
    json s;
    try {
        s = json::parse(sf);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed summary.json: " + std::string(e.what()));
    }
    const fs::path out(out_dir);
    fs::create_directories(out);
    const auto dates = read_csv(in / "delayed_by_date.csv");
    write_svg(dates, out / "delayed_by_date.svg");

    std::ofstream md(out / "report.md", std::ios::binary);
    md << "# Sensor network report\n\n";
    const json& m = s["manifest"];
    if (m.is_object() && m.contains("ledger")) {
        md << "Ledger `" << m.value("ledger", "") << "`, city `" << m.value("city", "") << "`.\n\n";
    }
    md << "## Readings\n\n";
    md << "- input rows: " << s["rows"]["input"].get<std::size_t>() << "\n";
    md << "- analyzed rows: " << s["rows"]["analyzed"].get<std::size_t>() << "\n";
    if (s["clean"].is_object()) {
        for (const auto& [k, v] : s["clean"].items()) {
            md << "- " << k << ": " << v.get<std::size_t>() << "\n";
        }
    }
    const json& net = s["network"];
    md << "- network median RSS: " << fixed(net["median_rss_dbm"], 0) << " dBm\n";
    md << "- latency median " << fixed(net["median_latency_s"], 0) << " s, IQR " << fixed(net["latency_q1_s"], 0) << "-"
       << fixed(net["latency_q3_s"], 0) << " s\n";
    md << "- nodes with median RSS at or below -100 dBm: " << net["low_signal_nodes"].get<std::size_t>() << "\n\n";

    md << "## Latency\n\n";
    table(md, read_csv(in / "latency_table.csv"), 100);

    md << "## Dead zones\n\n";
    const json& dz = s["dead_zones"];
    md << dz["count"].get<std::size_t>() << " of " << s["sites"].get<std::size_t>() << " sites never connected ("
       << fixed(json(100.0 * dz["fraction"].get<double>()), 2) << "%); " << dz["relocated"].get<std::size_t>()
       << " found a connecting spot nearby.\n\n";
    table(md, rounded(read_csv(in / "dead_zones.csv"), {1, 3, 4, 5}, 1), 1000);
    md << "Tallest building within 100 m, dead vs relocated (one-sided rank-sum): p = " << pvalue(s["forensics"]["p"])
       << (s["forensics"]["exact"].get<bool>() ? " (exact)" : " (normal approximation)") << ".\n\n";
    md << "Nearest-tower distance, dead vs healthy (two-sided rank-sum): p = " << pvalue(s["distance"]["p"]) << ".\n\n";

    md << "## Lowest median RSS among connected nodes\n\n";
    {
        auto nodes = read_csv(in / "node_summary.csv");
        if (!nodes.empty()) {
            nodes.erase(std::remove_if(nodes.begin() + 1, nodes.end(), [](const auto& row) { return row[4] == "0"; }),
                        nodes.end());
        }
        if (nodes.size() > 1) {
            std::stable_sort(nodes.begin() + 1, nodes.end(), [](const auto& a, const auto& b) {
                const double ra = a[1].empty() ? 0 : std::stod(a[1]);
                const double rb = b[1].empty() ? 0 : std::stod(b[1]);
                return ra < rb;
            });
        }
        table(md, nodes, 10);
        md << "## Most delayed nodes\n\n";
        if (nodes.size() > 1) {
            std::stable_sort(nodes.begin() + 1, nodes.end(), [](const auto& a, const auto& b) {
                const long da = std::stol(a[6]);
                const long db = std::stol(b[6]);
                return da != db ? da > db : a[0] < b[0];
            });
        }
        table(md, nodes, 10);
    }

    md << "## Delayed readings\n\n";
    const json& del = s["delayed"];
    md << del["rows"].get<std::size_t>() << " rows (" << fixed(del["pct_of_rows"], 3) << "% of all) were delayed.\n\n";
    for (const char* g : {"dates", "nodes", "towers"}) {
        const json& t = del[std::string("top5_") + g];
        md << "- top 5 " << g << ": " << fixed(t["delayed_pct"], 2) << "% of delayed rows, "
           << fixed(t["total_pct"], 2) << "% of all rows\n";
    }
    md << "\n![delayed by date](delayed_by_date.svg)\n\n";
    md << "### Top dates\n\n";
    table(md, rounded(dates, {3, 4}, 2), 10);
    md << "### Top nodes\n\n";
    table(md, rounded(read_csv(in / "delayed_by_node.csv"), {3, 4}, 2), 10);
    md << "### Top towers\n\n";
    table(md, rounded(read_csv(in / "delayed_by_tower.csv"), {3, 4}, 2), 10);

    md << "## Power-saving mode\n\n";
    if (s["psm"].is_object()) {
        const json& p = s["psm"];
        md << "- episodes: " << p["episode_count"].get<std::size_t>() << " on "
           << p["device_count"].get<std::size_t>() << " devices\n";
        md << "- total: " << fixed(p["total_s"], 3) << " s; median " << fixed(p["median_len_s"], 3) << " s, max "
           << fixed(p["max_len_s"], 3) << " s, min " << fixed(p["min_len_s"], 3) << " s\n";
        md << "- lost readings estimate: " << p["lost_readings_estimate"].get<std::int64_t>() << "\n";
        md << "- devices in PSM during winter: " << p["winter_devices"].get<std::size_t>() << " ("
           << fixed(json(100.0 * p["winter_device_fraction"].get<double>()), 2) << "% of sites)\n\n";
    } else {
        md << "_no episode file given_\n\n";
    }

    md << "## Temporal features\n\n";
    md << "Spearman correlation with permutation p-values; Holm adjusts across the whole family.\n\n";
    {
        auto t = read_csv(in / "temporal.csv");
        for (std::size_t i = 1; i < t.size(); ++i) {
            t[i][3] = fixed(t[i][3], 4);
            t[i][4] = fixed(t[i][4], 4);
            t[i][5] = fixed(t[i][5], 4);
        }
        table(md, t, 100);
    }

    md << "## Equity\n\n";
    {
        auto e = read_csv(in / "equity.csv");
        for (std::size_t i = 1; i < e.size(); ++i) {
            for (std::size_t k : {2u, 3u, 5u, 6u}) {
                e[i][k] = fixed(e[i][k], 3);
            }
        }
        table(md, e, 100);
    }

    md << "## PSM predictability\n\n";
    if (s["regression"].is_object()) {
        for (const char* model : {"logistic", "linear"}) {
            const json& f = s["regression"][model];
            md << "- " << model << ": " << (f["converged"].get<bool>() ? "converged" : "not converged") << " after "
               << f["iterations"].get<int>() << " iterations";
            if (!f["note"].get<std::string>().empty()) {
                md << " (" << f["note"].get<std::string>() << ")";
            }
            md << "\n";
        }
        md << "\n";
        auto reg = read_csv(in / "regression.csv");
        for (std::size_t i = 1; i < reg.size(); ++i) {
            for (std::size_t k = 2; k < 5; ++k) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4g", reg[i][k].empty() ? NAN : std::stod(reg[i][k]));
                reg[i][k] = reg[i][k].empty() ? "n/a" : buf;
            }
            reg[i][5] = reg[i][5].empty() ? "n/a" : pvalue(json(std::stod(reg[i][5])));
        }
        table(md, reg, 100);
    } else {
        md << "_no episode file given_\n\n";
    }
    md << "## Inter-cell interference screen\n\n";
    md << s["ici_candidates"].get<std::size_t>() << " sites see three towers at comparable distance (ici.csv).\n";
}

} // namespace sensim::report
