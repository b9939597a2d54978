// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "sensim/firmware.hpp"
#include "sensim/ledger.hpp"
#include "sensim/scenario.hpp"

namespace sensim::engine {

enum class EventKind : std::uint8_t { Wake, Sample, ConnectFail, ConnectSuccess, Reboot, PsmEnter, PsmExit };

std::string to_string(EventKind k);

struct EventRecord {
    UnixMs t = 0;
    std::uint32_t node = 0;
    EventKind kind = EventKind::Wake;
    std::string detail;
};

/// Observer hook: called for every firmware-level event regardless of the log level.
struct TraceEvent {
    UnixMs t = 0;
    std::size_t node = 0;
    EventKind kind = EventKind::Wake;
    double battery_pct = 0;
    power::Mode mode = power::Mode::Active;
    int retry_count = 0;
    bool recording_enabled = true;
    std::size_t buffer_size = 0;
};

struct AttemptRecord {
    UnixMs t = 0;
    std::uint32_t node = 0;
    std::uint32_t tower = 0;
    float rss_dbm = 0;
    radio::Outcome outcome = radio::Outcome::Success;
};

struct RunOptions {
    /// Replaces the computed panel output (W) for a node over the tick starting at tick_start.
    std::function<double(std::size_t node, UnixMs tick_start, double computed_w)> harvest_override;
    std::function<void(const TraceEvent&)> trace;
};

/// Per-node accounting. Opportunities are scheduled wakes; every one ends up as a created
/// reading (emitted or still buffered) or a suppressed one (Psm or the recording gate).
struct NodeCounters {
    std::uint64_t opportunities = 0;
    std::uint64_t created = 0;
    std::uint64_t emitted = 0;
    std::uint64_t buffered_at_end = 0;
    std::uint64_t suppressed_psm = 0;
    std::uint64_t suppressed_recording = 0;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::uint64_t fail_weak = 0;
    std::uint64_t fail_outage = 0;
    std::uint64_t reboots = 0;
    double initial_charge_mah = 0;
    double final_charge_mah = 0;
    power::StepFlows flows;
    double min_pct = 100;
};

struct SimOutput {
    ledger::Ledger ledger;
    std::vector<EventRecord> events;
    std::vector<AttemptRecord> attempts;
    std::vector<power::PsmEpisode> episodes; // ordered by node, then start
    std::vector<NodeCounters> nodes;         // indexed like city.sites
    std::vector<std::string> node_ids;
    std::uint64_t events_processed = 0;
};

/// Min-heap on (t, seq): equal timestamps pop in insertion order.
class EventQueue {
public:
    enum class Kind : std::uint8_t { Wake, Reconnect };
    struct Item {
        UnixMs t;
        std::uint64_t seq;
        std::uint32_t node;
        Kind kind;
    };

    void push(UnixMs t, std::uint32_t node, Kind kind) { heap_.push({t, seq_++, node, kind}); }
    Item pop() {
        Item i = heap_.top();
        heap_.pop();
        return i;
    }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            return a.t != b.t ? a.t > b.t : a.seq > b.seq;
        }
    };
    std::priority_queue<Item, std::vector<Item>, Later> heap_;
    std::uint64_t seq_ = 0;
};

/// Runs one scenario. Deterministic for a fixed config. Throws std::invalid_argument before
/// any event executes when the config is invalid.
SimOutput run(const ScenarioConfig& config, const RunOptions& options = {});

/// Writes ledger.csv, events.jsonl, psm.csv, manifest.json (and attempts.jsonl when enabled)
/// into out_dir, creating it if needed. The manifest embeds the resolved scenario and, when given,
/// the invocation that produced the run.
void write_outputs(const ScenarioConfig& config, const SimOutput& out, const std::string& out_dir,
                   const nlohmann::json& invocation = nullptr);

std::string git_describe();

} // namespace sensim::engine
