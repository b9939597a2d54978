// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "oracles.hpp"
#include "sensim/rng.hpp"
#include "sensim/stats.hpp"

using namespace sensim;
using namespace sensim::stats;

TEST_SUITE("stats") {

TEST_CASE("lower median") {
    CHECK(lower_median(std::vector<int>{3, 1, 2}) == 2);
    CHECK(lower_median(std::vector<int>{4, 1, 3, 2}) == 2);
    CHECK(lower_median(std::vector<double>{-80, -90}) == -90.0);
    CHECK_FALSE(lower_median(std::vector<int>{}).has_value());
}

TEST_CASE("midranks share ties") {
    const std::vector<double> v{10, 20, 20, 5, 20};
    CHECK(midranks(v) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("exact rank-sum agrees with enumeration") {
    const std::vector<double> x{20, 25, 30, 22};
    const std::vector<double> y{8, 10, 9, 12};
    const auto r = rank_sum_test(x, y, Alternative::Greater);
    CHECK(r.exact);
    CHECK(r.p < 0.05);
    CHECK(r.p == doctest::Approx(oracle::enumerated_rank_sum_p_greater(x, y)).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(1.0 / 70.0));

    const auto same = rank_sum_test(x, x, Alternative::Greater);
    CHECK(same.p > 0.5);
    CHECK(same.p < 0.7);

    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> a, b;
        const int na = 1 + int(uniform(rng, 0, 8));
        const int nb = 1 + int(uniform(rng, 0, 8));
        for (int i = 0; i < na; ++i) {
            a.push_back(std::round(uniform(rng, 0, 10))); // coarse values force ties
        }
        for (int i = 0; i < nb; ++i) {
            b.push_back(std::round(uniform(rng, 0, 10)));
        }
        CHECK(rank_sum_test(a, b, Alternative::Greater).p ==
              doctest::Approx(oracle::enumerated_rank_sum_p_greater(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("large samples use the normal approximation") {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(i + 5.0);
        y.push_back(i);
    }
    const auto r = rank_sum_test(x, y, Alternative::Greater);
    CHECK_FALSE(r.exact);
    CHECK(r.p > 0);
    CHECK(r.p < 0.5);
    const auto two = rank_sum_test(x, y, Alternative::TwoSided);
    CHECK(two.p == doctest::Approx(2 * r.p).epsilon(1e-9));
    CHECK_THROWS_AS(rank_sum_test(std::vector<double>{}, y, Alternative::Greater), std::invalid_argument);
}

TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(*spearman(x, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1));
    CHECK(*spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1));
    CHECK_FALSE(spearman(x, std::vector<double>{1, 1, 1, 1, 1}).has_value());

    const auto constant = spearman_permutation(x, std::vector<double>{3, 3, 3, 3, 3}, 100, 1);
    CHECK_FALSE(constant.rho.has_value());
    CHECK_FALSE(constant.p.has_value());
    CHECK_FALSE(constant.reason.empty());

    std::vector<double> a, b;
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        a.push_back(i);
        b.push_back(i + uniform(rng, -20, 20));
    }
    const auto strong = spearman_permutation(a, b, 500, 3);
    CHECK(*strong.p == doctest::Approx(1.0 / 501));
    CHECK(spearman_permutation(a, b, 500, 3).p == strong.p);
}

TEST_CASE("holm adjustment") {
    const auto adj = holm_adjust({0.01, std::nullopt, 0.04, 0.03});
    CHECK(*adj[0] == doctest::Approx(0.03));
    CHECK_FALSE(adj[1].has_value());
    CHECK(*adj[3] == doctest::Approx(0.06));
    CHECK(*adj[2] == doctest::Approx(0.06)); // monotone step-down
    CHECK(*holm_adjust({0.9, 0.8})[0] == doctest::Approx(1.0));
}

} // TEST_SUITE
