// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/firmware.hpp"

#include <cmath>
#include <stdexcept>

namespace sensim::firmware {

namespace {

std::optional<double> observed_rss(const radio::ConnectionAttempt& a) {
    if (a.outcome == radio::Outcome::FailWeak) {
        return std::nullopt;
    }
    return std::round(a.rss_dbm); // modems report whole dBm
}

void flush(NodeState& s, const radio::ConnectionAttempt& a, const Delivery& d, UnixMs t, WakeResult& r) {
    const UnixMs arrival = t + UnixMs(d.latency_s) * kMsPerSecond + d.jitter_ms;
    r.emissions.reserve(r.emissions.size() + s.buffer.size());
    for (auto& b : s.buffer) {
        r.emissions.push_back({b, a.tower, arrival});
    }
    s.buffer.clear();
}

void on_attempt(NodeState& s, UnixMs t, const radio::ConnectionAttempt& a, const Delivery& d, WakeResult& r) {
    r.outcome = a.outcome;
    if (a.outcome == radio::Outcome::Success) {
        s.retry_count = 0;
        s.recording_enabled = true;
        flush(s, a, d, t, r);
    } else {
        ++s.retry_count;
        r.rebooted = maybe_reboot(s);
    }
}

} // namespace

WakeResult wake(NodeState& s, UnixMs t, const radio::ConnectionAttempt& a, const Delivery& d, UnixMs interval_ms) {
    if (s.mode != power::Mode::Active) {
        throw std::logic_error("wake scheduled while in power-saving mode");
    }
    WakeResult r;
    const bool success = a.outcome == radio::Outcome::Success;
    if (s.recording_enabled || success) {
        s.buffer.push_back({s.next_reading_id++, t, observed_rss(a), s.battery.pct()});
        r.recorded = true;
    } else {
        r.suppressed = true;
    }
    on_attempt(s, t, a, d, r);
    s.next_wake = t + interval_ms;
    return r;
}

WakeResult reconnect(NodeState& s, UnixMs t, const radio::ConnectionAttempt& a, const Delivery& d) {
    WakeResult r;
    on_attempt(s, t, a, d, r);
    return r;
}

bool maybe_reboot(NodeState& s) {
    if (s.retry_count < kMaxRetries) {
        return false;
    }
    s.retry_count = 0;
    s.recording_enabled = false;
    ++s.reboot_count;
    return true;
}

Gate psm_gate(NodeState& s, UnixMs t, const power::PowerParams& p, const std::string& node_id,
              std::vector<power::PsmEpisode>& episodes) {
    const power::Mode before = s.mode;
    s.mode = power::psm_step(s.battery.pct(), before, p);
    if (before == power::Mode::Active && s.mode == power::Mode::Psm) {
        episodes.push_back({node_id, t, t, true});
        return Gate::EnteredPsm;
    }
    if (before == power::Mode::Psm && s.mode == power::Mode::Active) {
        for (auto it = episodes.rbegin(); it != episodes.rend(); ++it) {
            if (it->node_id == node_id && it->open) {
                it->end = t;
                it->open = false;
                break;
            }
        }
        return Gate::ExitedPsm;
    }
    return s.mode == power::Mode::Psm ? Gate::InPsm : Gate::Active;
}

} // namespace sensim::firmware
