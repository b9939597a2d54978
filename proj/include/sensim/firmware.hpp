// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "sensim/power.hpp"
#include "sensim/radio.hpp"

namespace sensim::firmware {

inline constexpr int kMaxRetries = 10;

struct BufferedReading {
    std::uint64_t id = 0;
    UnixMs sample_time = 0;
    std::optional<double> rss_dbm; // absent when the modem never registered
    double battery_pct = 0;
};

struct NodeState {
    std::size_t node = 0;
    power::Mode mode = power::Mode::Active;
    power::BatteryState battery;
    std::deque<BufferedReading> buffer;
    int retry_count = 0;
    bool recording_enabled = true;
    UnixMs next_wake = 0;
    std::uint64_t reboot_count = 0;
    std::uint64_t next_reading_id = 0;
};

/// A reading handed to the cloud, with the tower it went through.
struct Emission {
    BufferedReading reading;
    std::size_t tower = 0;
    UnixMs arrival = 0;
};

struct WakeResult {
    bool recorded = false;    // a new reading was created at t
    bool suppressed = false;  // sampling ran but recording was gated off
    radio::Outcome outcome = radio::Outcome::Success;
    bool rebooted = false;
    std::vector<Emission> emissions; // oldest first
};

/// Integer-second transmit latency plus a sub-second arrival offset.
struct Delivery {
    int latency_s = 5;
    int jitter_ms = 0;
};

/// One duty-cycle wake at t. Sampling and connection run together: the reading is stamped at
/// t and, on success, arrives with the buffer at t + latency. A reading is recorded when
/// recording is enabled or when this very connection succeeds. Failures buffer the reading
/// and count toward a reboot. next_wake advances by interval_ms.
/// Precondition: state.mode == Active (throws std::logic_error otherwise).
WakeResult wake(NodeState& state, UnixMs t, const radio::ConnectionAttempt& attempt, const Delivery& delivery,
                UnixMs interval_ms);

/// The reconnection attempt made right after a reboot. Nothing is sampled.
WakeResult reconnect(NodeState& state, UnixMs t, const radio::ConnectionAttempt& attempt, const Delivery& delivery);

/// At 10 consecutive failures: clear the counter, stop recording, keep the buffer.
bool maybe_reboot(NodeState& state);

enum class Gate { Active, EnteredPsm, InPsm, ExitedPsm };

/// Hysteresis check at a wake boundary. Opens or closes an episode in `episodes`.
/// A node leaving Psm resumes sampling at its next wake, not this one.
Gate psm_gate(NodeState& state, UnixMs t, const power::PowerParams& p, const std::string& node_id,
              std::vector<power::PsmEpisode>& episodes);

} // namespace sensim::firmware
