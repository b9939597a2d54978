// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace sensim {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

UnixMs from_civil(const CivilDate& date, int hour, int minute, int second, int millis) {
    using namespace std::chrono;
    const sys_days days{year{date.year} / month{date.month} / day{date.day}};
    const std::int64_t d = days.time_since_epoch().count();
    return d * kMsPerDay + hour * kMsPerHour + minute * kMsPerMinute + second * kMsPerSecond + millis;
}

CivilDate to_civil(UnixMs t) {
    using namespace std::chrono;
    const sys_days days{std::chrono::days{utc_day_index(t)}};
    const year_month_day ymd{days};
    return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

std::int64_t utc_day_index(UnixMs t) { return floor_div(t, kMsPerDay); }

int day_of_year(UnixMs t) {
    const CivilDate c = to_civil(t);
    const UnixMs jan1 = from_civil({c.year, 1, 1});
    return int(utc_day_index(t) - utc_day_index(jan1)) + 1;
}

int weekday(UnixMs t) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    const std::int64_t d = utc_day_index(t);
    return int(((d % 7) + 7 + 3) % 7);
}

std::string to_iso8601(UnixMs t) {
    const CivilDate c = to_civil(t);
    const UnixMs in_day = t - utc_day_index(t) * kMsPerDay;
    const int h = int(in_day / kMsPerHour);
    const int m = int((in_day / kMsPerMinute) % 60);
    const int s = int((in_day / kMsPerSecond) % 60);
    const int ms = int(in_day % kMsPerSecond);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", c.year, c.month, c.day, h, m, s, ms);
    return buf;
}

std::string to_date_string(UnixMs t) { return to_date_string(to_civil(t)); }

std::string to_date_string(const CivilDate& c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

std::optional<CivilDate> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    int mo = 0;
    int d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return CivilDate{y, unsigned(mo), unsigned(d)};
}

std::optional<UnixMs> parse_iso8601(std::string_view text) {
    if (text.size() < 10) {
        return std::nullopt;
    }
    const auto date = parse_date(text.substr(0, 10));
    if (!date) {
        return std::nullopt;
    }
    if (text.size() == 10) {
        return from_civil(*date);
    }
    if (text[10] != 'T' && text[10] != ' ') {
        return std::nullopt;
    }
    std::string_view rest = text.substr(11);
    if (!rest.empty() && rest.back() == 'Z') {
        rest.remove_suffix(1);
    }
    if (rest.size() < 8 || rest[2] != ':' || rest[5] != ':') {
        return std::nullopt;
    }
    int h = 0;
    int m = 0;
    int s = 0;
    if (!parse_int(rest.substr(0, 2), h) || !parse_int(rest.substr(3, 2), m) || !parse_int(rest.substr(6, 2), s)) {
        return std::nullopt;
    }
    if (h > 23 || m > 59 || s > 60) {
        return std::nullopt;
    }
    int ms = 0;
    if (rest.size() > 8) {
        if (rest[8] != '.' || rest.size() == 9) {
            return std::nullopt;
        }
        std::string_view frac = rest.substr(9);
        int scale = 100;
        for (std::size_t i = 0; i < frac.size(); ++i) {
            const char ch = frac[i];
            if (ch < '0' || ch > '9') {
                return std::nullopt;
            }
            if (i < 3) {
                ms += (ch - '0') * scale;
                scale /= 10;
            }
        }
    }
    return from_civil(*date, h, m, s, ms);
}

} // namespace sensim
