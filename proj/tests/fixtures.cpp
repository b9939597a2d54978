// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "fixtures.hpp"

namespace fixture {

using namespace sensim;

void add_row(ledger::Ledger& l, const std::string& node, const std::string& tower, UnixMs sample,
             std::int64_t latency_ms, std::optional<double> rss) {
    const std::uint32_t n = l.nodes.intern(node);
    const std::int32_t t = tower == "UNKNOWN" ? ledger::kUnknownTower : std::int32_t(l.towers.intern(tower));
    l.rows.push_back(ledger::ingest(n, t, sample, sample + latency_ms, rss, 80, l.rows.size()));
}

geo::CityModel two_zone_city() {
    geo::CityModel c;
    c.zones.push_back({"Z1", {0, 0, 1000, 1000}, 0.8, true, geo::Archetype::Residential});
    c.zones.push_back({"Z2", {1000, 0, 2000, 1000}, 0.1, false, geo::Archetype::Residential});
    c.towers.push_back({"T001", {500, 500}, 30, 43, {}});
    c.towers.push_back({"T900", {9000, 9000}, 30, 43, {}});
    for (int i = 0; i < 5; ++i) {
        c.sites.push_back({"A" + std::to_string(i), {100.0 + 100 * i, 200}, 2.5, geo::SelectionKind::Random, "Z1"});
    }
    for (int i = 0; i < 5; ++i) {
        c.sites.push_back({"B" + std::to_string(i), {1100.0 + 100 * i, 200}, 2.5, geo::SelectionKind::Random, "Z2"});
    }
    return c;
}

ledger::Ledger cleaning_fixture() {
    ledger::Ledger l;
    UnixMs t = from_civil({2021, 7, 3});
    const auto next = [&] { return t += 300 * kMsPerSecond; };
    add_row(l, "A0", "T001", next(), 5000, std::nullopt);
    add_row(l, "A0", "T900", next(), 5000, std::nullopt); // both rules, the first one counts
    for (int i = 0; i < 3; ++i) {
        add_row(l, "A1", "T001", next(), 5000, 0.0);
    }
    add_row(l, "A2", "T900", next(), 5000, -80.0);
    for (int i = 0; i < 4; ++i) {
        add_row(l, "A3", "T001", next(), (86401 + i * 1000) * kMsPerSecond, -80.0);
    }
    add_row(l, "A4", "UNKNOWN", next(), 5000, -85.0);
    add_row(l, "A4", "UNKNOWN", next(), 6000, -86.0);
    add_row(l, "B0", "T001", next(), 86400 * kMsPerSecond, -90.0); // exactly a day is kept
    for (int i = 0; i < 7; ++i) {
        add_row(l, "B1", "T001", next(), 4000, -70.0 - i);
    }
    return l;
}

} // namespace fixture
