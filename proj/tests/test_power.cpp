// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <stdexcept>

#include <doctest.h>

#include "sensim/power.hpp"
#include "sensim/rng.hpp"

using namespace sensim;
using namespace sensim::power;

TEST_SUITE("power") {

TEST_CASE("4 mA drains the usable pack in 15 days") {
    const PowerParams p;
    CHECK(p.usable_capacity_mah() == doctest::Approx(1440));
    BatteryState s = BatteryState::full(p);
    for (int h = 0; h < 359; ++h) {
        s = step_battery(s, 0, 4, 3600, p);
    }
    CHECK(s.charge_mah == doctest::Approx(4));
    s = step_battery(s, 0, 4, 3600, p);
    CHECK(s.charge_mah == doctest::Approx(0).epsilon(1e-9));
    CHECK(s.pct() >= 0);
}

TEST_CASE("equilibrium harvest leaves the charge unchanged") {
    const PowerParams p;
    const BatteryState s{700, 1440};
    const double load = 4;
    const double w = p.nominal_voltage * load / 1000.0 / p.charge_efficiency;
    CHECK(step_battery(s, w, load, 60, p).charge_mah == doctest::Approx(700).epsilon(1e-12));
}

TEST_CASE("charge is clamped") {
    const PowerParams p;
    StepFlows f;
    const auto full = step_battery(BatteryState::full(p), 6, 0, 3600, p, &f);
    CHECK(full.charge_mah == full.capacity_mah);
    CHECK(f.spilled > 0);
    StepFlows g;
    const auto empty = step_battery({1, 1440}, 0, 100, 3600, p, &g);
    CHECK(empty.charge_mah == 0);
    CHECK(g.shortfall == doctest::Approx(99));
    CHECK_THROWS_AS(step_battery(full, 0, 1, 0, p), std::invalid_argument);
}

TEST_CASE("energy is conserved across random trajectories") {
    const PowerParams p;
    Rng rng(6);
    for (int run = 0; run < 50; ++run) {
        BatteryState s{uniform(rng, 0, 1440), 1440};
        const double start = s.charge_mah;
        StepFlows f;
        for (int k = 0; k < 2000; ++k) {
            if (uniform01(rng) < 0.1) {
                s = draw_charge(s, uniform(rng, 0, 0.5), &f);
            } else {
                s = step_battery(s, uniform(rng, 0, 1) < 0.5 ? 0 : uniform(rng, 0, 6), uniform(rng, 0, 150),
                                 uniform(rng, 1, 600), p, &f);
            }
        }
        const double expected = start + f.harvested - f.consumed - f.spilled + f.shortfall;
        CHECK(s.charge_mah == doctest::Approx(expected).epsilon(1e-6).scale(1440));
    }
}

TEST_CASE("percent never rises without harvest") {
    const PowerParams p;
    Rng rng(9);
    BatteryState s = BatteryState::full(p);
    double last = s.pct();
    for (int k = 0; k < 5000; ++k) {
        s = step_battery(s, 0, uniform(rng, 0, 200), uniform(rng, 1, 300), p);
        CHECK(s.pct() <= last);
        CHECK(s.pct() >= 0);
        last = s.pct();
    }
}

TEST_CASE("hysteresis thresholds") {
    CHECK(psm_step(15.0, Mode::Active) == Mode::Psm);
    CHECK(psm_step(15.01, Mode::Active) == Mode::Active);
    CHECK(psm_step(39.9, Mode::Psm) == Mode::Psm);
    CHECK(psm_step(40.0, Mode::Psm) == Mode::Active);
    CHECK(psm_step(5.0, Mode::Psm) == Mode::Psm);
    CHECK(psm_step(90.0, Mode::Active) == Mode::Active);
}

TEST_CASE("average load") {
    const PowerParams p;
    const double avg = average_load(p, 300, 5);
    CHECK(avg >= 3.0);
    CHECK(avg <= 5.0);
    CHECK(average_load(p, 600, 5) < avg);

    PowerParams idle = p;
    idle.gas_sample_current_ma = idle.pm_sample_current_ma = idle.modem_tx_current_ma = idle.sleep_current_ma();
    CHECK(average_load(idle, 300, 5) == doctest::Approx(0.04));
    CHECK_THROWS_AS(average_load(p, 0, 5), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    PowerParams p;
    CHECK_NOTHROW(validate(p));
    p.psm_enter_pct = 40;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.usable_fraction = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.psm_exit_pct = 101;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("PSM episode CSV round trip") {
    const auto path = (std::filesystem::temp_directory_path() / "sensim_psm_roundtrip.csv").string();
    const std::vector<PsmEpisode> eps{{"S001", from_civil({2021, 12, 1}, 10), from_civil({2021, 12, 3}, 9, 15), false},
                                      {"S002", from_civil({2022, 1, 5}), from_civil({2022, 1, 5}, 0, 0, 1, 250), false}};
    write_psm_csv(eps, path);
    const auto back = read_psm_csv(path);
    REQUIRE(back.size() == eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        CHECK(back[i].node_id == eps[i].node_id);
        CHECK(back[i].start == eps[i].start);
        CHECK(back[i].end == eps[i].end);
    }
    std::filesystem::remove(path);
}

} // TEST_SUITE
