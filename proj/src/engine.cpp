// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/engine.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "sensim/rng.hpp"
#include "sensim/solar.hpp"

#ifndef SENSIM_GIT_DESCRIBE
#define SENSIM_GIT_DESCRIBE "unknown"
#endif

namespace sensim::engine {

std::string to_string(EventKind k) {
    switch (k) {
    case EventKind::Wake:
        return "Wake";
    case EventKind::Sample:
        return "Sample";
    case EventKind::ConnectFail:
        return "ConnectFail";
    case EventKind::ConnectSuccess:
        return "ConnectSuccess";
    case EventKind::Reboot:
        return "Reboot";
    case EventKind::PsmEnter:
        return "PsmEnter";
    case EventKind::PsmExit:
        return "PsmExit";
    }
    return "Unknown";
}

std::string git_describe() { return SENSIM_GIT_DESCRIBE; }

namespace {

bool logged(EventLogLevel level, EventKind k) {
    switch (level) {
    case EventLogLevel::None:
        return false;
    case EventLogLevel::Summary:
        return k == EventKind::Reboot || k == EventKind::PsmEnter || k == EventKind::PsmExit;
    case EventLogLevel::Exceptions:
        return k == EventKind::Reboot || k == EventKind::PsmEnter || k == EventKind::PsmExit ||
               k == EventKind::ConnectFail;
    case EventLogLevel::All:
        return true;
    }
    return false;
}

std::string fmt_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", pct);
    return buf;
}

struct NodeRuntime {
    firmware::NodeState st;
    Rng radio_rng;
    Rng ingest_rng;
    UnixMs battery_t = 0; // battery integrated up to here
    std::int64_t cached_tick = -1;
    double cached_w = 0;
    bool active = false;
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const RunOptions& opt)
        : cfg_(cfg), opt_(opt), city_(cfg.city), start_(cfg.start), end_(cfg.end()),
          tick_(UnixMs(cfg.battery_tick_s) * kMsPerSecond), interval_(UnixMs(cfg.sampling_interval_s) * kMsPerSecond) {
        apply_outages(city_, cfg.outages);
        links_ = radio::LinkTable(city_, cfg.radio);
        build_sun_table();
        const solar::OccluderSet occ{city_.buildings, city_.trees};
        casters_.reserve(city_.sites.size());
        for (const auto& s : city_.sites) {
            casters_.emplace_back(s, occ);
        }
        for (const auto& s : city_.sites) {
            out_.ledger.nodes.intern(s.id);
            out_.node_ids.push_back(s.id);
        }
        for (const auto& t : city_.towers) {
            out_.ledger.towers.intern(t.id);
        }
        out_.nodes.resize(city_.sites.size());
        episodes_.resize(city_.sites.size());
        base_load_ = power::baseline_current_ma(cfg.power);
        pm_pulse_ = power::pulse_mah(cfg.power, cfg.power.pm_sample_current_ma, cfg.power.pm_sample_duration_s);
    }

    SimOutput run() {
        schedule_initial_wakes();
        while (!queue_.empty()) {
            const auto item = queue_.pop();
            ++out_.events_processed;
            if (item.kind == EventQueue::Kind::Wake) {
                on_wake(item.node, item.t);
            } else {
                on_reconnect(item.node, item.t);
            }
        }
        finish();
        return std::move(out_);
    }

private:
    void build_sun_table() {
        const std::int64_t n = (end_ - start_ + tick_ - 1) / tick_;
        std::unordered_map<std::int64_t, double> cloud;
        for (const auto& d : cfg_.cloud) {
            cloud[utc_day_index(from_civil(d.date))] = d.attenuation;
        }
        sun_.resize(std::size_t(n));
        irr_.resize(std::size_t(n));
        for (std::int64_t k = 0; k < n; ++k) {
            const UnixMs t = start_ + k * tick_;
            sun_[std::size_t(k)] = solar::sun_position(city_.origin_lat, city_.origin_lon, t);
            const auto it = cloud.find(utc_day_index(t));
            irr_[std::size_t(k)] = solar::irradiance(sun_[std::size_t(k)], it == cloud.end() ? 0.0 : it->second);
        }
    }

    void schedule_initial_wakes() {
        nodes_.resize(city_.sites.size());
        for (std::size_t i = 0; i < city_.sites.size(); ++i) {
            const auto& site = city_.sites[i];
            auto& n = nodes_[i];
            n.radio_rng = substream(cfg_.master_seed, "radio/" + site.id);
            n.ingest_rng = substream(cfg_.master_seed, "ingest/" + site.id);
            Rng phase = substream(cfg_.master_seed, "phase/" + site.id);
            UnixMs on = start_;
            if (const auto it = cfg_.activations.find(site.id); it != cfg_.activations.end()) {
                on = std::max(on, it->second);
            }
            n.st.node = i;
            n.st.battery = power::BatteryState::full(cfg_.power);
            n.st.battery.charge_mah = n.st.battery.capacity_mah * cfg_.initial_battery_pct / 100.0;
            n.battery_t = on;
            auto& c = out_.nodes[i];
            c.initial_charge_mah = n.st.battery.charge_mah;
            c.final_charge_mah = n.st.battery.charge_mah;
            c.min_pct = n.st.battery.pct();
            const UnixMs first = on + UnixMs(uniform01(phase) * double(interval_));
            if (first < end_) {
                n.active = true;
                n.st.next_wake = first;
                queue_.push(first, std::uint32_t(i), EventQueue::Kind::Wake);
            }
        }
    }

    double harvest(std::size_t i, std::int64_t k) {
        auto& n = nodes_[i];
        if (k == n.cached_tick) {
            return n.cached_w;
        }
        double w = 0;
        const double irr = irr_[std::size_t(k)];
        if (irr > 0 && !casters_[i].shaded(sun_[std::size_t(k)])) {
            w = solar::panel_power(cfg_.panel, irr);
        }
        if (opt_.harvest_override) {
            w = opt_.harvest_override(i, start_ + k * tick_, w);
        }
        n.cached_tick = k;
        n.cached_w = w;
        return w;
    }

    void integrate(std::size_t i, UnixMs t) {
        auto& n = nodes_[i];
        auto& c = out_.nodes[i];
        while (n.battery_t < t) {
            const std::int64_t k = (n.battery_t - start_) / tick_;
            const UnixMs seg = std::min(start_ + (k + 1) * tick_, t);
            const double dt = double(seg - n.battery_t) / 1000.0;
            const double load = n.st.mode == power::Mode::Psm ? cfg_.power.sleep_current_ma() : base_load_;
            n.st.battery = power::step_battery(n.st.battery, harvest(i, k), load, dt, cfg_.power, &c.flows);
            n.battery_t = seg;
        }
        c.min_pct = std::min(c.min_pct, n.st.battery.pct());
    }

    void draw(std::size_t i, double mah) {
        auto& n = nodes_[i];
        n.st.battery = power::draw_charge(n.st.battery, mah, &out_.nodes[i].flows);
        out_.nodes[i].min_pct = std::min(out_.nodes[i].min_pct, n.st.battery.pct());
    }

    void emit_event(std::size_t i, UnixMs t, EventKind k, const std::function<std::string()>& detail) {
        if (opt_.trace) {
            const auto& st = nodes_[i].st;
            opt_.trace({t, i, k, st.battery.pct(), st.mode, st.retry_count, st.recording_enabled, st.buffer.size()});
        }
        if (logged(cfg_.event_log, k)) {
            out_.events.push_back({t, std::uint32_t(i), k, detail ? detail() : std::string()});
        }
    }

    void on_wake(std::uint32_t i, UnixMs t) {
        auto& n = nodes_[i];
        auto& c = out_.nodes[i];
        integrate(i, t);
        ++c.opportunities;
        emit_event(i, t, EventKind::Wake, nullptr);
        const auto gate = firmware::psm_gate(n.st, t, cfg_.power, city_.sites[i].id, episodes_[i]);
        if (gate == firmware::Gate::EnteredPsm) {
            emit_event(i, t, EventKind::PsmEnter, [&] { return "battery_pct=" + fmt_pct(n.st.battery.pct()); });
        } else if (gate == firmware::Gate::ExitedPsm) {
            emit_event(i, t, EventKind::PsmExit, [&] { return "battery_pct=" + fmt_pct(n.st.battery.pct()); });
        }
        if (gate != firmware::Gate::Active) {
            ++c.suppressed_psm;
            n.st.next_wake = t + interval_;
        } else {
            const auto attempt = radio::attempt_connect(city_, links_, i, t, cfg_.radio, n.radio_rng);
            const firmware::Delivery d = draw_delivery(n);
            auto r = firmware::wake(n.st, t, attempt, d, interval_);
            if (r.recorded) {
                ++c.created;
                emit_event(i, t, EventKind::Sample, [&] { return "reading=" + std::to_string(n.st.next_reading_id - 1); });
            } else {
                ++c.suppressed_recording;
            }
            draw(i, pm_pulse_);
            settle_attempt(i, t, attempt, d, r);
        }
        if (n.st.next_wake < end_) {
            queue_.push(n.st.next_wake, i, EventQueue::Kind::Wake);
        }
    }

    void on_reconnect(std::uint32_t i, UnixMs t) {
        auto& n = nodes_[i];
        integrate(i, t);
        if (n.st.mode == power::Mode::Psm) {
            return;
        }
        const auto attempt = radio::attempt_connect(city_, links_, i, t, cfg_.radio, n.radio_rng);
        const firmware::Delivery d = draw_delivery(n);
        auto r = firmware::reconnect(n.st, t, attempt, d);
        settle_attempt(i, t, attempt, d, r);
    }

    firmware::Delivery draw_delivery(NodeRuntime& n) {
        firmware::Delivery d;
        d.latency_s = radio::sample_latency(cfg_.radio, n.radio_rng);
        d.jitter_ms = int(uniform01(n.radio_rng) * 1000.0);
        return d;
    }

    void settle_attempt(std::uint32_t i, UnixMs t, const radio::ConnectionAttempt& a, const firmware::Delivery& d,
                        firmware::WakeResult& r) {
        auto& n = nodes_[i];
        auto& c = out_.nodes[i];
        ++c.attempts;
        const bool ok = a.outcome == radio::Outcome::Success;
        const double modem_s = ok ? double(d.latency_s) : cfg_.power.connect_timeout_s;
        draw(i, power::pulse_mah(cfg_.power, cfg_.power.modem_tx_current_ma, modem_s));
        if (cfg_.attempt_log) {
            out_.attempts.push_back({t, i, std::uint32_t(a.tower), float(a.rss_dbm), a.outcome});
        }
        if (ok) {
            ++c.successes;
            emit_event(i, t, EventKind::ConnectSuccess, [&] {
                return "tower=" + city_.towers[a.tower].id + " latency_s=" + std::to_string(d.latency_s) +
                       " delivered=" + std::to_string(r.emissions.size());
            });
            for (const auto& e : r.emissions) {
                std::int32_t tower = std::int32_t(e.tower);
                if (cfg_.unknown_tower_fraction > 0 && uniform01(n.ingest_rng) < cfg_.unknown_tower_fraction) {
                    tower = ledger::kUnknownTower;
                }
                out_.ledger.rows.push_back(ledger::ingest(i, tower, e.reading.sample_time, e.arrival,
                                                          e.reading.rss_dbm, e.reading.battery_pct, e.reading.id));
            }
            c.emitted += r.emissions.size();
        } else {
            if (a.outcome == radio::Outcome::FailWeak) {
                ++c.fail_weak;
            } else {
                ++c.fail_outage;
            }
            emit_event(i, t, EventKind::ConnectFail, [&] {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.1f", a.rss_dbm);
                return "tower=" + city_.towers[a.tower].id + " outcome=" + radio::to_string(a.outcome) + " rss=" + buf;
            });
        }
        if (r.rebooted) {
            ++c.reboots;
            emit_event(i, t, EventKind::Reboot, [&] {
                return "reboot_count=" + std::to_string(n.st.reboot_count) +
                       " buffered=" + std::to_string(n.st.buffer.size());
            });
            const UnixMs again =
                t + UnixMs(std::llround((cfg_.power.connect_timeout_s + cfg_.power.reboot_duration_s) * 1000.0));
            if (again < end_) {
                queue_.push(again, i, EventQueue::Kind::Reconnect);
            }
        }
    }

    void finish() {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto& n = nodes_[i];
            auto& c = out_.nodes[i];
            if (n.active) {
                integrate(i, end_);
            }
            c.final_charge_mah = n.st.battery.charge_mah;
            c.buffered_at_end = n.st.buffer.size();
            for (auto& e : episodes_[i]) {
                if (e.open) {
                    e.end = end_;
                }
                if (e.end > e.start) {
                    out_.episodes.push_back(e);
                }
            }
        }
    }

    const ScenarioConfig& cfg_;
    const RunOptions& opt_;
    geo::CityModel city_;
    UnixMs start_;
    UnixMs end_;
    UnixMs tick_;
    UnixMs interval_;
    radio::LinkTable links_;
    std::vector<solar::SunPosition> sun_;
    std::vector<double> irr_;
    std::vector<solar::ShadeCaster> casters_;
    std::vector<NodeRuntime> nodes_;
    std::vector<std::vector<power::PsmEpisode>> episodes_;
    EventQueue queue_;
    SimOutput out_;
    double base_load_ = 0;
    double pm_pulse_ = 0;
};

} // namespace

SimOutput run(const ScenarioConfig& config, const RunOptions& options) {
    validate(config);
    Simulation sim(config, options);
    return sim.run();
}

void write_outputs(const ScenarioConfig& config, const SimOutput& out, const std::string& out_dir,
                   const nlohmann::json& invocation) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    ledger::write_ledger(out.ledger, (dir / "ledger.csv").string());
    power::write_psm_csv(out.episodes, (dir / "psm.csv").string());
    {
        std::ofstream ev(dir / "events.jsonl", std::ios::binary);
        for (const auto& e : out.events) {
            nlohmann::json j{{"t", to_iso8601(e.t)},
                             {"node_id", out.node_ids[e.node]},
                             {"event", to_string(e.kind)},
                             {"detail", e.detail}};
            ev << j.dump() << '\n';
        }
    }
    if (config.attempt_log) {
        std::ofstream at(dir / "attempts.jsonl", std::ios::binary);
        for (const auto& a : out.attempts) {
            nlohmann::json j{{"node_id", out.node_ids[a.node]},
                             {"tower_id", out.ledger.towers[a.tower]},
                             {"t", to_iso8601(a.t)},
                             {"rss_dbm", std::round(double(a.rss_dbm) * 10.0) / 10.0},
                             {"outcome", radio::to_string(a.outcome)}};
            at << j.dump() << '\n';
        }
    }
    std::uint64_t created = 0, emitted = 0, buffered = 0, sup_psm = 0, sup_rec = 0, reboots = 0, attempts = 0,
                  opportunities = 0;
    for (const auto& c : out.nodes) {
        created += c.created;
        emitted += c.emitted;
        buffered += c.buffered_at_end;
        sup_psm += c.suppressed_psm;
        sup_rec += c.suppressed_recording;
        reboots += c.reboots;
        attempts += c.attempts;
        opportunities += c.opportunities;
    }
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash(config));
    nlohmann::json files = nlohmann::json::array({"ledger.csv", "events.jsonl", "psm.csv"});
    if (config.attempt_log) {
        files.push_back("attempts.jsonl");
    }
    nlohmann::json m{{"tool", "sensim"},
                     {"git_describe", git_describe()},
                     {"scenario", config.name},
                     {"config_hash", hash},
                     {"master_seed", config.master_seed},
                     {"start", to_iso8601(config.start)},
                     {"end", to_iso8601(config.end())},
                     {"sites", config.city.sites.size()},
                     {"towers", config.city.towers.size()},
                     {"counts",
                      {{"ledger_rows", out.ledger.rows.size()},
                       {"events_logged", out.events.size()},
                       {"events_processed", out.events_processed},
                       {"psm_episodes", out.episodes.size()},
                       {"sample_opportunities", opportunities},
                       {"readings_created", created},
                       {"readings_emitted", emitted},
                       {"readings_buffered_at_end", buffered},
                       {"suppressed_psm", sup_psm},
                       {"suppressed_recording", sup_rec},
                       {"connection_attempts", attempts},
                       {"reboots", reboots}}},
                     {"files", files},
                     {"invocation", invocation},
                     {"scenario_config", config}};
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    mf << m.dump(1) << '\n';
}

} // namespace sensim::engine
