// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sensim/time.hpp"

namespace sensim::ledger {

inline constexpr std::int32_t kUnknownTower = -1;
inline constexpr std::string_view kUnknownTowerId = "UNKNOWN";
inline constexpr std::string_view kHeader =
    "node_id,tower_id,sample_time,arrival_time,latency_s,rss_dbm,battery_pct,payload";

/// One stored reading. Node and tower are indices into the owning Ledger's id tables.
struct LedgerRow {
    std::uint32_t node = 0;
    std::int32_t tower = kUnknownTower;
    UnixMs sample_time = 0;
    UnixMs arrival_time = 0;
    std::int32_t latency_s = 0;
    float rss_dbm = std::numeric_limits<float>::quiet_NaN(); // NaN: not reported
    float battery_pct = 0;
    std::uint64_t payload = 0;

    bool has_rss() const { return !std::isnan(rss_dbm); }
    bool unknown_tower() const { return tower == kUnknownTower; }
    friend bool operator==(const LedgerRow& a, const LedgerRow& b);
};

/// Whole seconds between sample and arrival, rounded toward zero. Throws if arrival < sample.
std::int32_t latency_seconds(UnixMs sample, UnixMs arrival);

/// Interned identifiers: rows carry small integers, the table maps them back to ids.
class IdTable {
public:
    std::uint32_t intern(std::string_view id);
    std::optional<std::uint32_t> find(std::string_view id) const;
    const std::string& operator[](std::size_t i) const { return ids_[i]; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

struct Ledger {
    IdTable nodes;
    IdTable towers;
    std::vector<LedgerRow> rows;

    const std::string& node_id(const LedgerRow& r) const { return nodes[r.node]; }
    std::string_view tower_id(const LedgerRow& r) const {
        return r.unknown_tower() ? kUnknownTowerId : std::string_view(towers[std::size_t(r.tower)]);
    }
};

/// Cloud-side ingest: computes the floored latency. Throws std::invalid_argument if arrival < sample.
LedgerRow ingest(std::uint32_t node, std::int32_t tower, UnixMs sample, UnixMs arrival, std::optional<double> rss,
                 double battery_pct, std::uint64_t payload);

/// Battery percent is stored to two decimals so the CSV round-trips exactly.
float quantize_pct(double pct);

void write_ledger(const Ledger& ledger, const std::string& path);
/// Throws std::runtime_error with file:line on malformed input.
Ledger read_ledger(const std::string& path);

/// Formats one row exactly as write_ledger does (no trailing newline).
std::string format_row(const Ledger& ledger, const LedgerRow& row);

} // namespace sensim::ledger
