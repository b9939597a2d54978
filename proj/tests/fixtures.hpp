// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

// Hand-built inputs whose expected results are known by construction.

#pragma once

#include <optional>
#include <string>

#include "sensim/geo.hpp"
#include "sensim/ledger.hpp"

namespace fixture {

/// Two 1 km zones: Z1 disadvantaged with 80% minority, Z2 neither. Sites A0..A4 in Z1, B0..B4 in Z2.
/// T001 stands inside the city, T900 far outside it.
sensim::geo::CityModel two_zone_city();

/// Twenty rows against two_zone_city(): 2 without RSS, 3 with zero RSS, 1 on the outside tower,
/// 4 more than a day late, 2 on an UNKNOWN tower and 8 clean, one of them exactly a day late.
/// Cleaning keeps 10 rows and flags 2.
sensim::ledger::Ledger cleaning_fixture();

void add_row(sensim::ledger::Ledger& l, const std::string& node, const std::string& tower, sensim::UnixMs sample,
             std::int64_t latency_ms, std::optional<double> rss);

} // namespace fixture
