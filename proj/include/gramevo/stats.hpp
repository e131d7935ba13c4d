#pragma once

#include <cstddef>
#include <span>

namespace gramevo {

struct ComparisonResult {
    double uStatistic = 0.0;      // U of the first sample
    double pValueTwoSided = 1.0;
    double medianA = 0.0;
    double medianB = 0.0;
    std::size_t nA = 0;
    std::size_t nB = 0;
    bool exact = false;
};

/// U of `a` by the rank-sum method with midranks for ties.
double mann_whitney_statistic(std::span<const double> a, std::span<const double> b);

/// Two-sided p from the exact permutation distribution of U given the
/// observed ties: min(1, 2 * min(P(U <= u), P(U >= u))).
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);

/// Two-sided p from the normal approximation with tie correction and a 0.5
/// continuity correction.
double mann_whitney_asymptotic_p(std::span<const double> a, std::span<const double> b);

/// Exact p when n + m <= 20, normal approximation otherwise. Throws
/// std::invalid_argument on an empty sample.
ComparisonResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

double median(std::span<const double> values);

} // namespace gramevo
