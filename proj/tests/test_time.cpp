// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <chrono>
#include <stdexcept>

#include <doctest.h>

#include "sensim/rng.hpp"
#include "sensim/time.hpp"

using namespace sensim;

TEST_SUITE("time") {

TEST_CASE("civil dates agree with std::chrono over four centuries") {
    namespace ch = std::chrono;
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
        const int days = int(uniform(rng, -80000, 80000));
        const ch::sys_days sd{ch::days{days}};
        const ch::year_month_day ymd{sd};
        const CivilDate c{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
        CHECK(from_civil(c) == UnixMs(days) * kMsPerDay);
        CHECK(to_civil(UnixMs(days) * kMsPerDay + 123456) == c);
        CHECK(weekday(UnixMs(days) * kMsPerDay) == int(ch::weekday{sd}.iso_encoding()) - 1);
    }
}

TEST_CASE("known calendar facts") {
    CHECK(weekday(from_civil({2021, 7, 3})) == 5); // a Saturday
    CHECK(day_of_year(from_civil({2021, 12, 31})) == 365);
    CHECK(day_of_year(from_civil({2024, 12, 31})) == 366);
    CHECK(utc_day_index(-1) == -1);
}

TEST_CASE("ISO-8601 round trip keeps milliseconds") {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const UnixMs t = UnixMs(uniform(rng, 0, 4.0e12));
        const auto back = parse_iso8601(to_iso8601(t));
        REQUIRE(back.has_value());
        CHECK(*back == t);
    }
    CHECK(to_iso8601(from_civil({2021, 6, 1}, 12, 0, 5, 900)) == "2021-06-01T12:00:05.900Z");
    CHECK(parse_iso8601("2021-06-01T12:00:05.9999Z") == from_civil({2021, 6, 1}, 12, 0, 5, 999));
    CHECK(parse_iso8601("2021-06-01") == from_civil({2021, 6, 1}));
}

TEST_CASE("malformed timestamps are rejected") {
    CHECK_FALSE(parse_iso8601("").has_value());
    CHECK_FALSE(parse_iso8601("2021-13-01").has_value());
    CHECK_FALSE(parse_iso8601("2021-02-30T00:00:00Z").has_value());
    CHECK_FALSE(parse_iso8601("2021-06-01T25:00:00Z").has_value());
    CHECK_FALSE(parse_iso8601("2021-06-01T12:00:00Zjunk").has_value());
    CHECK_FALSE(parse_date("2021/06/01").has_value());
}

TEST_CASE("substreams are independent of sibling names") {
    Rng a = substream(42, "radio/S001");
    Rng b = substream(42, "radio/S001");
    Rng c = substream(42, "radio/S002");
    CHECK(a() == b());
    CHECK(a() != c());
    CHECK(substream(42, "x", 1)() != substream(42, "x", 2)());
    Rng u(3);
    for (int i = 0; i < 1000; ++i) {
        const double v = uniform01(u);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

} // TEST_SUITE
