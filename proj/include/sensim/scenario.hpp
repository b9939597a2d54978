// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensim/geo.hpp"
#include "sensim/power.hpp"
#include "sensim/radio.hpp"
#include "sensim/solar.hpp"

namespace sensim {

/// Either a single window on one tower, or a flapping day: the listed towers cycle
/// down/up for the whole UTC date, starting down at offset_minutes past midnight.
struct OutageRule {
    std::string tower_id;           // single-window form
    std::optional<TimeWindow> window;
    std::vector<std::string> tower_ids; // flapping form
    std::optional<CivilDate> date;
    int down_minutes = 40;
    int up_minutes = 10;
    int offset_minutes = 0;
};

struct CloudDay {
    CivilDate date;
    double attenuation = 0;
};

enum class EventLogLevel { None, Summary, Exceptions, All };

std::string to_string(EventLogLevel l);
std::optional<EventLogLevel> parse_event_log_level(std::string_view s);

struct CityGenerator {
    geo::GenConfig config;
    std::uint64_t seed = 1;
};

struct ScenarioConfig {
    std::string name = "scenario";
    /// Exactly one source describes the city; `city` always holds the resolved model.
    std::optional<std::string> city_file;
    std::optional<CityGenerator> city_generator;
    geo::CityModel city;

    UnixMs start = 0;
    double duration_days = 1;
    int sampling_interval_s = 300;
    int battery_tick_s = 60;
    radio::RadioParams radio;
    power::PowerParams power;
    solar::PanelSpec panel;
    double initial_battery_pct = 100;
    double unknown_tower_fraction = 0.127;
    std::vector<OutageRule> outages;
    std::vector<CloudDay> cloud;
    std::map<std::string, UnixMs> activations; // site id -> first possible wake
    std::uint64_t master_seed = 1;
    EventLogLevel event_log = EventLogLevel::Summary;
    bool attempt_log = false;

    UnixMs end() const { return start + UnixMs(duration_days * double(kMsPerDay)); }
};

/// Throws std::invalid_argument naming the first problem; nothing runs on an invalid config.
void validate(const ScenarioConfig& c);

/// Expands outage rules into sorted windows on the city's towers (merged with any already there).
void apply_outages(geo::CityModel& city, const std::vector<OutageRule>& rules);

/// Windows produced by one flapping rule.
std::vector<TimeWindow> flap_windows(const OutageRule& rule);

void to_json(nlohmann::json& j, const ScenarioConfig& c);
/// Resolves city_file relative to `base_dir` and runs the generator if given.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
/// Throws std::runtime_error (unreadable or malformed) or std::invalid_argument (invalid values).
ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& c, const std::string& path);

/// FNV-1a over the canonical JSON form, including the resolved city.
std::uint64_t config_hash(const ScenarioConfig& c);

/// The bundled chicago-like city configuration (118 sites, 86/20/12).
geo::GenConfig default_city_config();
inline constexpr std::uint64_t kDefaultCitySeed = 20210703;

/// A year-long scenario over the bundled city, with a tower outage schedule concentrated on
/// five dates and a staggered installation of the later sites.
ScenarioConfig default_scenario();

/// Small single-tower scenario for quick runs: one day, n sites, no occluders.
ScenarioConfig smoke_scenario(int sites = 1);

} // namespace sensim
