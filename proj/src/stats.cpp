// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "sensim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sensim/rng.hpp"

namespace sensim::stats {

std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double rank = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[idx[k]] = rank;
        }
        i = j + 1;
    }
    return r;
}

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

double t_two_sided_p(double t, double df) {
    if (!(df > 0) || !std::isfinite(t)) {
        return std::isfinite(t) ? 1.0 : 0.0;
    }
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

namespace {

/// Distribution of the sum of `n1` doubled midranks drawn from the pooled sample.
/// Doubling keeps half-integer midranks integral. Counts are kept as doubles (<= C(40,20)).
std::vector<double> rank_sum_distribution(const std::vector<int>& doubled, std::size_t n1) {
    const int total = std::accumulate(doubled.begin(), doubled.end(), 0);
    // ways[k][s]: subsets of size k with doubled sum s
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(std::size_t(total) + 1, 0.0));
    ways[0][0] = 1;
    for (int r : doubled) {
        for (std::size_t k = n1; k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (int s = total; s >= r; --s) {
                dst[std::size_t(s)] += src[std::size_t(s - r)];
            }
        }
    }
    return ways[n1];
}

} // namespace

RankSumResult rank_sum_test(std::span<const double> x, std::span<const double> y, Alternative alt,
                            std::size_t exact_limit) {
    if (x.empty() || y.empty()) {
        throw std::invalid_argument("rank_sum_test: both samples need at least one value");
    }
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto r = midranks(pooled);
    const double n1 = double(x.size());
    const double n2 = double(y.size());
    const double n = n1 + n2;
    RankSumResult res;
    for (std::size_t i = 0; i < x.size(); ++i) {
        res.w += r[i];
    }
    res.u = res.w - n1 * (n1 + 1) / 2.0;

    if (x.size() <= exact_limit && y.size() <= exact_limit) {
        std::vector<int> doubled(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            doubled[i] = int(std::lround(2.0 * r[i]));
        }
        const auto dist = rank_sum_distribution(doubled, x.size());
        const int obs = int(std::lround(2.0 * res.w));
        const double all = std::accumulate(dist.begin(), dist.end(), 0.0);
        double ge = 0;
        double le = 0;
        for (std::size_t s = 0; s < dist.size(); ++s) {
            if (int(s) >= obs) {
                ge += dist[s];
            }
            if (int(s) <= obs) {
                le += dist[s];
            }
        }
        res.exact = true;
        switch (alt) {
        case Alternative::Greater:
            res.p = ge / all;
            break;
        case Alternative::Less:
            res.p = le / all;
            break;
        case Alternative::TwoSided:
            res.p = std::min(1.0, 2.0 * std::min(ge, le) / all);
            break;
        }
        return res;
    }

    // Tie-corrected variance of U.
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const double t = double(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double mean = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)));
    if (!(var > 0)) {
        res.p = 1.0;
        return res;
    }
    const double sd = std::sqrt(var);
    const double d = res.u - mean;
    switch (alt) {
    case Alternative::Greater:
        res.z = (d - 0.5) / sd;
        res.p = 1.0 - normal_cdf(res.z);
        break;
    case Alternative::Less:
        res.z = (d + 0.5) / sd;
        res.p = normal_cdf(res.z);
        break;
    case Alternative::TwoSided:
        res.z = (std::abs(d) - 0.5) / sd;
        res.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::max(0.0, res.z))));
        break;
    }
    return res;
}

namespace {

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const double n = double(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0 || sbb <= 0) {
        return std::nullopt;
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("spearman: length mismatch");
    }
    if (x.size() < 2) {
        return std::nullopt;
    }
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

PermutationResult spearman_permutation(std::span<const double> x, std::span<const double> y, int permutations,
                                       std::uint64_t seed) {
    PermutationResult out;
    if (x.size() != y.size()) {
        throw std::invalid_argument("spearman_permutation: length mismatch");
    }
    if (x.size() < 3) {
        out.reason = "fewer than 3 observations";
        return out;
    }
    const auto rx = midranks(x);
    auto ry = midranks(y);
    const auto rho = pearson(rx, ry);
    if (!rho) {
        out.reason = "constant series";
        return out;
    }
    out.rho = rho;
    Rng rng = substream(seed, "spearman-permutation");
    int extreme = 0;
    for (int k = 0; k < permutations; ++k) {
        // Fisher-Yates with the 53-bit uniform keeps the shuffle platform-independent.
        for (std::size_t i = ry.size() - 1; i > 0; --i) {
            const auto j = std::size_t(uniform01(rng) * double(i + 1));
            std::swap(ry[i], ry[std::min(j, i)]);
        }
        const auto r = pearson(rx, ry);
        if (r && std::abs(*r) >= std::abs(*rho) - 1e-12) {
            ++extreme;
        }
    }
    out.p = (1.0 + extreme) / (1.0 + permutations);
    return out;
}

std::vector<std::optional<double>> holm_adjust(const std::vector<std::optional<double>>& p) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i]) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *p[a] < *p[b]; });
    std::vector<std::optional<double>> out(p.size());
    double running = 0;
    const std::size_t m = order.size();
    for (std::size_t k = 0; k < m; ++k) {
        running = std::max(running, std::min(1.0, double(m - k) * *p[order[k]]));
        out[order[k]] = running;
    }
    return out;
}

} // namespace sensim::stats
