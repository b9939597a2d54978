// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/power.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sensim::power {

void validate(const PowerParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("power params: ") + what);
        }
    };
    require(p.nominal_capacity_mah > 0, "nominal_capacity_mah must be positive");
    require(p.usable_fraction > 0 && p.usable_fraction <= 1, "usable_fraction must be in (0, 1]");
    require(p.nominal_voltage > 0, "nominal_voltage must be positive");
    require(p.sleep_current_ua >= 0, "sleep_current_ua must be non-negative");
    require(p.gas_sample_period_s > 0, "gas_sample_period_s must be positive");
    require(p.gas_sample_duration_s >= 0 && p.gas_sample_duration_s <= p.gas_sample_period_s,
            "gas_sample_duration_s must lie within the gas period");
    require(p.pm_sample_duration_s >= 0, "pm_sample_duration_s must be non-negative");
    require(p.gas_sample_current_ma >= 0 && p.pm_sample_current_ma >= 0 && p.modem_tx_current_ma >= 0,
            "currents must be non-negative");
    require(p.psm_enter_pct >= 0 && p.psm_enter_pct < p.psm_exit_pct && p.psm_exit_pct <= 100,
            "require 0 <= psm_enter_pct < psm_exit_pct <= 100");
    require(p.charge_efficiency > 0 && p.charge_efficiency <= 1, "charge_efficiency must be in (0, 1]");
    require(p.connect_timeout_s >= 0 && p.reboot_duration_s >= 0, "timeouts must be non-negative");
}

BatteryState step_battery(const BatteryState& s, double harvest_power_w, double load_ma, double dt_s,
                          const PowerParams& p, StepFlows* flows) {
    if (!(dt_s > 0)) {
        throw std::invalid_argument("step_battery: dt must be positive");
    }
    const double in = std::max(0.0, harvest_power_w) / p.nominal_voltage * 1000.0 * p.charge_efficiency * dt_s / 3600.0;
    const double out = std::max(0.0, load_ma) * dt_s / 3600.0;
    const double raw = s.charge_mah + in - out;
    BatteryState next = s;
    next.charge_mah = std::clamp(raw, 0.0, s.capacity_mah);
    if (flows) {
        flows->harvested += in;
        flows->consumed += out;
        if (raw > s.capacity_mah) {
            flows->spilled += raw - s.capacity_mah;
        } else if (raw < 0) {
            flows->shortfall += -raw;
        }
    }
    return next;
}

BatteryState draw_charge(const BatteryState& s, double mah, StepFlows* flows) {
    BatteryState next = s;
    const double raw = s.charge_mah - std::max(0.0, mah);
    next.charge_mah = std::max(0.0, raw);
    if (flows) {
        flows->consumed += std::max(0.0, mah);
        if (raw < 0) {
            flows->shortfall += -raw;
        }
    }
    return next;
}

std::string to_string(Mode m) { return m == Mode::Active ? "active" : "psm"; }

Mode psm_step(double pct, Mode mode, const PowerParams& p) {
    if (mode == Mode::Active && pct <= p.psm_enter_pct) {
        return Mode::Psm;
    }
    if (mode == Mode::Psm && pct >= p.psm_exit_pct) {
        return Mode::Active;
    }
    return mode;
}

double baseline_current_ma(const PowerParams& p) {
    const double sleep = p.sleep_current_ma();
    const double gas_duty = p.gas_sample_duration_s / p.gas_sample_period_s;
    return sleep + (p.gas_sample_current_ma - sleep) * gas_duty;
}

double average_load(const PowerParams& p, double sampling_interval_s, double mean_tx_latency_s) {
    if (!(sampling_interval_s > 0)) {
        throw std::invalid_argument("average_load: sampling interval must be positive");
    }
    const double pm_duty = p.pm_sample_duration_s / sampling_interval_s;
    const double tx_duty = mean_tx_latency_s / sampling_interval_s;
    return baseline_current_ma(p) + (p.pm_sample_current_ma - p.sleep_current_ma()) * pm_duty +
           (p.modem_tx_current_ma - p.sleep_current_ma()) * tx_duty;
}

void write_psm_csv(const std::vector<PsmEpisode>& episodes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "node_id,start_iso8601,end_iso8601,duration_s\n";
    char buf[64];
    for (const auto& e : episodes) {
        std::snprintf(buf, sizeof buf, "%.3f", e.duration_s());
        out << e.node_id << ',' << to_iso8601(e.start) << ',' << to_iso8601(e.end) << ',' << buf << '\n';
    }
}

std::vector<PsmEpisode> read_psm_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string line;
    std::getline(in, line);
    if (line != "node_id,start_iso8601,end_iso8601,duration_s") {
        throw std::runtime_error("'" + path + "' is not a PSM episode file");
    }
    std::vector<PsmEpisode> out;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string id, s, e;
        std::getline(ss, id, ',');
        std::getline(ss, s, ',');
        std::getline(ss, e, ',');
        const auto ts = parse_iso8601(s);
        const auto te = parse_iso8601(e);
        if (!ts || !te) {
            throw std::runtime_error("bad timestamp in '" + path + "': " + line);
        }
        out.push_back({id, *ts, *te, false});
    }
    return out;
}

} // namespace sensim::power
