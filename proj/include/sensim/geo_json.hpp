// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <json.hpp>

#include "sensim/geo.hpp"

namespace sensim::geo {

void to_json(nlohmann::json& j, const CityModel& c);
void from_json(const nlohmann::json& j, CityModel& c);

void to_json(nlohmann::json& j, const GenConfig& c);
void from_json(const nlohmann::json& j, GenConfig& c);

/// Reads and validates a city file. Throws std::runtime_error with the offending path or
/// the first invariant violation.
CityModel load_city(const std::string& path);
void save_city(const CityModel& city, const std::string& path);

} // namespace sensim::geo
