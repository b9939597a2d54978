// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "sensim/geo_json.hpp"
#include "sensim/rng.hpp"

namespace sensim {

using nlohmann::json;

namespace radio {

void to_json(json& j, const LatencyMass& m) { j = json::array({m.seconds, m.probability}); }
void from_json(const json& j, LatencyMass& m) {
    if (j.is_array()) {
        m.seconds = j.at(0).get<int>();
        m.probability = j.at(1).get<double>();
    } else {
        m.seconds = j.at("seconds").get<int>();
        m.probability = j.at("probability").get<double>();
    }
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RadioParams, ref_path_loss_db, ref_distance_m, path_loss_exponent,
                                                shadowing_sigma_db, blockage_loss_db, obstruction_db_per_m,
                                                sensitivity_dbm, dead_sentinel_dbm, base_latency_pmf)

} // namespace radio

namespace power {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PowerParams, nominal_capacity_mah, usable_fraction, nominal_voltage,
                                                sleep_current_ua, gas_sample_current_ma, gas_sample_duration_s,
                                                gas_sample_period_s, pm_sample_current_ma, pm_sample_duration_s,
                                                modem_tx_current_ma, psm_enter_pct, psm_exit_pct, charge_efficiency,
                                                connect_timeout_s, reboot_duration_s)
} // namespace power

namespace solar {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PanelSpec, rated_power, area_efficiency_product)
} // namespace solar

std::string to_string(EventLogLevel l) {
    switch (l) {
    case EventLogLevel::None:
        return "none";
    case EventLogLevel::Summary:
        return "summary";
    case EventLogLevel::Exceptions:
        return "exceptions";
    case EventLogLevel::All:
        return "all";
    }
    return "summary";
}

std::optional<EventLogLevel> parse_event_log_level(std::string_view s) {
    for (auto l : {EventLogLevel::None, EventLogLevel::Summary, EventLogLevel::Exceptions, EventLogLevel::All}) {
        if (s == to_string(l)) {
            return l;
        }
    }
    return std::nullopt;
}

std::vector<TimeWindow> flap_windows(const OutageRule& rule) {
    std::vector<TimeWindow> out;
    if (!rule.date) {
        return out;
    }
    const UnixMs day = from_civil(*rule.date);
    const UnixMs day_end = day + kMsPerDay;
    const UnixMs period = UnixMs(rule.down_minutes + rule.up_minutes) * kMsPerMinute;
    for (UnixMs s = day + UnixMs(rule.offset_minutes) * kMsPerMinute; s < day_end; s += period) {
        out.push_back({s, std::min(day_end, s + UnixMs(rule.down_minutes) * kMsPerMinute)});
    }
    return out;
}

void apply_outages(geo::CityModel& city, const std::vector<OutageRule>& rules) {
    auto tower = [&](const std::string& id) -> geo::Tower& {
        const auto i = city.tower_index(id);
        if (!i) {
            throw std::invalid_argument("outage references unknown tower '" + id + "'");
        }
        return city.towers[*i];
    };
    for (const auto& r : rules) {
        if (r.window) {
            tower(r.tower_id).outages.push_back(*r.window);
        } else {
            const auto windows = flap_windows(r);
            for (const auto& id : r.tower_ids) {
                auto& t = tower(id);
                t.outages.insert(t.outages.end(), windows.begin(), windows.end());
            }
        }
    }
    for (auto& t : city.towers) {
        geo::sort_outages(t);
    }
}

void validate(const ScenarioConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw std::invalid_argument("scenario: " + what);
        }
    };
    require(c.duration_days > 0, "duration_days must be positive");
    require(c.sampling_interval_s > 0, "sampling_interval_s must be positive");
    require(c.battery_tick_s > 0, "battery_tick_s must be positive");
    require(c.initial_battery_pct >= 0 && c.initial_battery_pct <= 100, "initial_battery_pct must be in [0, 100]");
    require(c.unknown_tower_fraction >= 0 && c.unknown_tower_fraction <= 1,
            "unknown_tower_fraction must be in [0, 1]");
    require(c.panel.rated_power > 0, "panel rated_power must be positive");
    radio::validate(c.radio);
    power::validate(c.power);
    require(!c.city.sites.empty(), "city has no sites");
    require(!c.city.towers.empty(), "city has no towers");
    const auto errors = geo::validate(c.city);
    require(errors.empty(), errors.empty() ? "" : "city: " + errors.front());
    for (const auto& r : c.outages) {
        if (r.window) {
            require(c.city.find_tower(r.tower_id) != nullptr, "outage references unknown tower '" + r.tower_id + "'");
            require(r.window->start < r.window->end, "outage window must have start < end");
        } else {
            require(r.date.has_value(), "outage rule needs either a window or a date");
            require(r.down_minutes > 0 && r.up_minutes >= 0, "flapping outage needs down_minutes > 0");
            for (const auto& id : r.tower_ids) {
                require(c.city.find_tower(id) != nullptr, "outage references unknown tower '" + id + "'");
            }
        }
    }
    for (const auto& d : c.cloud) {
        require(d.attenuation >= 0 && d.attenuation <= 1, "cloud attenuation must be in [0, 1]");
    }
    for (const auto& [id, t] : c.activations) {
        require(c.city.find_site(id) != nullptr, "activation references unknown site '" + id + "'");
    }
    // The combined schedule must still be a set of disjoint windows per tower.
    geo::CityModel probe;
    probe.towers = c.city.towers;
    apply_outages(probe, c.outages);
    for (const auto& t : probe.towers) {
        for (std::size_t i = 1; i < t.outages.size(); ++i) {
            require(t.outages[i - 1].end <= t.outages[i].start,
                    "tower '" + t.id + "' has overlapping outage windows");
        }
    }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw std::runtime_error(where + " must be a JSON object");
    }
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) {
            throw std::runtime_error("unknown key '" + k + "' in " + where);
        }
    }
}

std::set<std::string> keys_of(const json& j) {
    std::set<std::string> out;
    for (const auto& [k, v] : j.items()) {
        out.insert(k);
    }
    return out;
}

std::string iso(UnixMs t) { return to_iso8601(t); }

UnixMs time_from(const json& j, const std::string& what) {
    const auto t = parse_iso8601(j.get<std::string>());
    if (!t) {
        throw std::runtime_error("invalid timestamp for " + what + ": " + j.dump());
    }
    return *t;
}

CivilDate date_from(const json& j, const std::string& what) {
    const auto d = parse_date(j.get<std::string>());
    if (!d) {
        throw std::runtime_error("invalid date for " + what + ": " + j.dump());
    }
    return *d;
}

} // namespace

void to_json(json& j, const ScenarioConfig& c) {
    j = json::object();
    j["name"] = c.name;
    if (c.city_file) {
        j["city_file"] = *c.city_file;
    } else if (c.city_generator) {
        j["city_generator"] = {{"config", c.city_generator->config}, {"seed", c.city_generator->seed}};
    } else {
        j["city"] = c.city;
    }
    j["start"] = iso(c.start);
    j["duration_days"] = c.duration_days;
    j["sampling_interval_s"] = c.sampling_interval_s;
    j["battery_tick_s"] = c.battery_tick_s;
    j["radio"] = c.radio;
    j["power"] = c.power;
    j["panel"] = c.panel;
    j["initial_battery_pct"] = c.initial_battery_pct;
    j["unknown_tower_fraction"] = c.unknown_tower_fraction;
    json outages = json::array();
    for (const auto& r : c.outages) {
        if (r.window) {
            outages.push_back({{"tower_id", r.tower_id}, {"start", iso(r.window->start)}, {"end", iso(r.window->end)}});
        } else {
            outages.push_back({{"tower_ids", r.tower_ids},
                               {"date", to_date_string(*r.date)},
                               {"down_minutes", r.down_minutes},
                               {"up_minutes", r.up_minutes},
                               {"offset_minutes", r.offset_minutes}});
        }
    }
    j["outages"] = std::move(outages);
    json cloud = json::array();
    for (const auto& d : c.cloud) {
        cloud.push_back({{"date", to_date_string(d.date)}, {"attenuation", d.attenuation}});
    }
    j["cloud"] = std::move(cloud);
    json act = json::object();
    for (const auto& [id, t] : c.activations) {
        act[id] = iso(t);
    }
    j["activations"] = std::move(act);
    j["master_seed"] = c.master_seed;
    j["event_log"] = to_string(c.event_log);
    j["attempt_log"] = c.attempt_log;
}

ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir) {
    check_keys(j,
               {"name", "city", "city_file", "city_generator", "start", "duration_days", "sampling_interval_s",
                "battery_tick_s", "radio", "power", "panel", "initial_battery_pct", "unknown_tower_fraction",
                "outages", "cloud", "activations", "master_seed", "event_log", "attempt_log"},
               "scenario");
    ScenarioConfig c;
    c.name = j.value("name", c.name);
    const int sources = int(j.contains("city")) + int(j.contains("city_file")) + int(j.contains("city_generator"));
    if (sources != 1) {
        throw std::runtime_error("scenario needs exactly one of city, city_file, city_generator");
    }
    if (j.contains("city")) {
        c.city = j.at("city").get<geo::CityModel>();
    } else if (j.contains("city_file")) {
        c.city_file = j.at("city_file").get<std::string>();
        std::filesystem::path p(*c.city_file);
        if (p.is_relative()) {
            p = std::filesystem::path(base_dir) / p;
        }
        c.city = geo::load_city(p.string());
    } else {
        const json& g = j.at("city_generator");
        check_keys(g, {"config", "seed"}, "city_generator");
        CityGenerator gen;
        gen.config = g.value("config", json::object()).get<geo::GenConfig>();
        gen.seed = g.value("seed", std::uint64_t(1));
        c.city_generator = gen;
        c.city = geo::generate_city(gen.config, gen.seed);
    }
    for (auto& t : c.city.towers) {
        geo::sort_outages(t);
    }
    if (!j.contains("start")) {
        throw std::runtime_error("scenario is missing 'start'");
    }
    c.start = time_from(j.at("start"), "start");
    c.duration_days = j.value("duration_days", c.duration_days);
    c.sampling_interval_s = j.value("sampling_interval_s", c.sampling_interval_s);
    c.battery_tick_s = j.value("battery_tick_s", c.battery_tick_s);
    if (j.contains("radio")) {
        check_keys(j["radio"], keys_of(json(radio::RadioParams{})), "radio");
        c.radio = j["radio"].get<radio::RadioParams>();
    }
    if (j.contains("power")) {
        check_keys(j["power"], keys_of(json(power::PowerParams{})), "power");
        c.power = j["power"].get<power::PowerParams>();
    }
    if (j.contains("panel")) {
        check_keys(j["panel"], keys_of(json(solar::PanelSpec{})), "panel");
        c.panel = j["panel"].get<solar::PanelSpec>();
    }
    c.initial_battery_pct = j.value("initial_battery_pct", c.initial_battery_pct);
    c.unknown_tower_fraction = j.value("unknown_tower_fraction", c.unknown_tower_fraction);
    for (const auto& o : j.value("outages", json::array())) {
        OutageRule r;
        if (o.contains("tower_id")) {
            check_keys(o, {"tower_id", "start", "end"}, "outage window");
            r.tower_id = o.at("tower_id").get<std::string>();
            r.window = TimeWindow{time_from(o.at("start"), "outage start"), time_from(o.at("end"), "outage end")};
        } else {
            check_keys(o, {"tower_ids", "date", "down_minutes", "up_minutes", "offset_minutes"}, "outage rule");
            r.tower_ids = o.at("tower_ids").get<std::vector<std::string>>();
            r.date = date_from(o.at("date"), "outage date");
            r.down_minutes = o.value("down_minutes", r.down_minutes);
            r.up_minutes = o.value("up_minutes", r.up_minutes);
            r.offset_minutes = o.value("offset_minutes", r.offset_minutes);
        }
        c.outages.push_back(std::move(r));
    }
    for (const auto& d : j.value("cloud", json::array())) {
        check_keys(d, {"date", "attenuation"}, "cloud entry");
        c.cloud.push_back({date_from(d.at("date"), "cloud date"), d.at("attenuation").get<double>()});
    }
    const json activations = j.value("activations", json::object());
    for (const auto& [id, t] : activations.items()) {
        c.activations[id] = time_from(t, "activation of " + id);
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    const auto level = parse_event_log_level(j.value("event_log", std::string("summary")));
    if (!level) {
        throw std::runtime_error("event_log must be one of none, summary, exceptions, all");
    }
    c.event_log = *level;
    c.attempt_log = j.value("attempt_log", false);
    validate(c);
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed scenario '" + path + "': " + e.what());
    }
    try {
        return scenario_from_json(j, std::filesystem::path(path).parent_path().string());
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed scenario '" + path + "': " + e.what());
    }
}

void save_scenario(const ScenarioConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write scenario '" + path + "'");
    }
    out << json(c).dump(1) << '\n';
}

std::uint64_t config_hash(const ScenarioConfig& c) {
    const std::string cfg = json(c).dump();
    const std::string city = json(c.city).dump();
    return mix64(fnv1a64(cfg) ^ (fnv1a64(city) * 0x9E3779B97F4A7C15ULL));
}

// ---------------------------------------------------------------------------

geo::GenConfig default_city_config() {
    geo::GenConfig g;
    g.downtown_zones = {11, 14, 15};
    g.canyon_sites = 11;
    g.shadow_pocket_sites = 36;
    g.tree_sites = 12;
    return g;
}

namespace {

/// Five outage dates on five different weekdays, one per season and then some.
const CivilDate kOutageDates[] = {{2021, 8, 17}, {2021, 10, 7}, {2021, 12, 13}, {2022, 2, 26}, {2022, 5, 6}};

constexpr double kOutageCoverage = 0.6; // share of connectable sites whose tower flaps on each date
constexpr int kLateSites = 20;            // installed after the first month
constexpr double kEarlyWindowDays = 32;   // June 1 to July 3
constexpr double kLateSpreadDays = 120;

} // namespace

ScenarioConfig default_scenario() {
    ScenarioConfig c;
    c.name = "chicago-like";
    c.city_generator = CityGenerator{default_city_config(), kDefaultCitySeed};
    c.city = geo::generate_city(c.city_generator->config, c.city_generator->seed);
    c.start = from_civil({2021, 6, 1});
    c.duration_days = 365;
    c.radio.obstruction_db_per_m = 1.5;
    c.master_seed = 8684756;

    // Outages: on each date, flap the towers serving a seeded random subset of sites that
    // can connect at all, until the subset covers kOutageCoverage of them.
    const radio::LinkTable links(c.city, c.radio);
    std::vector<std::size_t> live;
    for (std::size_t s = 0; s < links.site_count(); ++s) {
        if (!links.structurally_dead(s)) {
            live.push_back(s);
        }
    }
    Rng rng = substream(c.master_seed, "default-outages");
    for (const CivilDate& d : kOutageDates) {
        std::vector<std::size_t> towers;
        for (std::size_t s : live) {
            towers.push_back(links.serving(s));
        }
        std::sort(towers.begin(), towers.end());
        towers.erase(std::unique(towers.begin(), towers.end()), towers.end());
        std::shuffle(towers.begin(), towers.end(), rng);
        std::vector<std::string> chosen;
        std::size_t covered = 0;
        for (std::size_t t : towers) {
            if (double(covered) >= kOutageCoverage * double(live.size())) {
                break;
            }
            chosen.push_back(c.city.towers[t].id);
            covered += std::size_t(std::count_if(live.begin(), live.end(), [&](std::size_t s) {
                return links.serving(s) == t;
            }));
        }
        std::sort(chosen.begin(), chosen.end());
        OutageRule r;
        r.tower_ids = std::move(chosen);
        r.date = d;
        r.down_minutes = 40;
        r.up_minutes = 10;
        r.offset_minutes = int(uniform(rng, 0, 50));
        c.outages.push_back(std::move(r));
    }

    // Staggered installation: most sites come online during the first month, the rest (a
    // seeded subset of non-EPA sites) over the following months.
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < c.city.sites.size(); ++s) {
        order.push_back(s);
    }
    Rng act = substream(c.master_seed, "default-activations");
    std::shuffle(order.begin(), order.end(), act);
    std::stable_partition(order.begin(), order.end(),
                          [&](std::size_t s) { return c.city.sites[s].kind == geo::SelectionKind::Epa; });
    const std::size_t n_late = std::min<std::size_t>(kLateSites, order.size());
    const std::size_t n_early = order.size() - n_late;
    for (std::size_t k = 0; k < order.size(); ++k) {
        double day;
        if (k < n_early) {
            day = kEarlyWindowDays * double(k) / double(std::max<std::size_t>(1, n_early));
        } else {
            day = kEarlyWindowDays + kLateSpreadDays * double(k - n_early + 1) / double(n_late);
        }
        c.activations[c.city.sites[order[k]].id] = c.start + UnixMs(day * double(kMsPerDay));
    }
    validate(c);
    return c;
}

ScenarioConfig smoke_scenario(int sites) {
    ScenarioConfig c;
    c.name = "smoke";
    geo::CityModel& city = c.city;
    city.zones.push_back({"Z01", {0, 0, 2000, 2000}, 0.3, false, geo::Archetype::Residential});
    city.towers.push_back({"T001", {1000, 1000}, 30, 43, {}});
    for (int i = 0; i < sites; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / std::max(1, sites);
        char id[16];
        std::snprintf(id, sizeof id, "S%03d", i + 1);
        city.sites.push_back({id, {1000 + 500 * std::cos(a), 1000 + 500 * std::sin(a)}, 2.5,
                              geo::SelectionKind::Random, "Z01"});
    }
    c.start = from_civil({2021, 7, 3});
    c.duration_days = 1;
    c.master_seed = 7;
    validate(c);
    return c;
}

} // namespace sensim
