// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sensim::stats {

/// Lower of the two middle values for even counts. Empty input has no median.
template <class T>
std::optional<T> lower_median(std::vector<T> v);

/// 1-based ranks with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> v);

enum class Alternative { Greater, Less, TwoSided };

struct RankSumResult {
    double w = 0;     // rank sum of the first sample
    double u = 0;     // Mann-Whitney U of the first sample
    double z = 0;     // normal score (0 for the exact path)
    double p = 1;
    bool exact = false;
};

/// Wilcoxon-Mann-Whitney rank-sum test of x against y. "Greater" means x tends to exceed y.
/// Exact (conditional on ties) when both samples have at most `exact_limit` values, otherwise
/// the normal approximation with tie and continuity corrections.
RankSumResult rank_sum_test(std::span<const double> x, std::span<const double> y, Alternative alt,
                            std::size_t exact_limit = 20);

/// Spearman rank correlation (Pearson on midranks). Empty when either side is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct PermutationResult {
    std::optional<double> rho;
    std::optional<double> p; // two-sided, (1 + extreme) / (1 + permutations)
    std::string reason;      // set when rho is undefined
};

PermutationResult spearman_permutation(std::span<const double> x, std::span<const double> y, int permutations,
                                       std::uint64_t seed);

/// Holm step-down adjustment; missing p-values stay missing and do not count toward the family.
std::vector<std::optional<double>> holm_adjust(const std::vector<std::optional<double>>& p);

double normal_cdf(double z);
/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

template <class T>
std::optional<T> lower_median(std::vector<T> v) {
    if (v.empty()) {
        return std::nullopt;
    }
    const std::size_t k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(k), v.end());
    return v[k];
}

} // namespace sensim::stats
