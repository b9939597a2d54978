// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sensim {

/// Milliseconds since 1970-01-01T00:00:00Z. All simulation clocks use this.
using UnixMs = std::int64_t;

inline constexpr UnixMs kMsPerSecond = 1000;
inline constexpr UnixMs kMsPerMinute = 60 * kMsPerSecond;
inline constexpr UnixMs kMsPerHour = 60 * kMsPerMinute;
inline constexpr UnixMs kMsPerDay = 24 * kMsPerHour;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

struct TimeWindow {
    UnixMs start = 0;
    UnixMs end = 0;

    bool contains(UnixMs t) const { return t >= start && t < end; }
    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

UnixMs from_civil(const CivilDate& date, int hour = 0, int minute = 0, int second = 0, int millis = 0);
CivilDate to_civil(UnixMs t);

/// Day of year, 1-based.
int day_of_year(UnixMs t);

/// 0 = Monday ... 6 = Sunday (ISO weekday minus one).
int weekday(UnixMs t);

/// Floor division of t by one day, i.e. the UTC day index since the epoch.
std::int64_t utc_day_index(UnixMs t);

/// "YYYY-MM-DDTHH:MM:SS.mmmZ". Always emits milliseconds so that parsing is lossless.
std::string to_iso8601(UnixMs t);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff...][Z]" and "YYYY-MM-DD". Fractional digits beyond
/// milliseconds are truncated.
std::optional<UnixMs> parse_iso8601(std::string_view text);

std::string to_date_string(UnixMs t);
std::string to_date_string(const CivilDate& date);
std::optional<CivilDate> parse_date(std::string_view text);

} // namespace sensim
