#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gramevo/stats.hpp"

using namespace gramevo;

namespace {

double pairwise_u(const std::vector<double>& a, const std::vector<double>& b)
{
    double u = 0.0;
    for (double x : a) {
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

// Two-sided p by enumerating every relabelling of the pooled sample.
double brute_force_p(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    double const observed = pairwise_u(a, b);
    std::vector<bool> mask(pooled.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    double lower = 0.0;
    double upper = 0.0;
    double total = 0.0;
    do {
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < pooled.size(); ++i) (mask[i] ? x : y).push_back(pooled[i]);
        double const u = pairwise_u(x, y);
        total += 1.0;
        if (u <= observed + 1e-9) lower += 1.0;
        if (u >= observed - 1e-9) upper += 1.0;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

} // namespace

TEST_SUITE("mann-whitney")
{
    TEST_CASE("statistic counts pairwise wins with half ties")
    {
        std::vector<double> a{1, 2, 2, 3, 5, 8};
        std::vector<double> b{2, 3, 4, 4, 9};
        CHECK(mann_whitney_statistic(a, b) == 10.5);
        CHECK(mann_whitney_statistic(b, a) == 19.5);
    }

    TEST_CASE("exact p without ties matches the reference")
    {
        std::vector<double> a{1.5, 2.5, 3.5, 4.5};
        std::vector<double> b{5, 6, 7};
        auto const r = mann_whitney_u(a, b);
        CHECK(r.exact);
        CHECK(r.uStatistic == 0.0);
        CHECK(r.pValueTwoSided == doctest::Approx(2.0 / 35.0).epsilon(1e-12));
        CHECK(r.medianA == 3.0);
        CHECK(r.medianB == 6.0);
        CHECK(r.nA == 4);
        CHECK(r.nB == 3);
    }

    TEST_CASE("exact p agrees with full enumeration")
    {
        std::mt19937_64 gen(12);
        for (int trial = 0; trial < 200; ++trial) {
            auto const n = std::uniform_int_distribution<std::size_t>(1, 6)(gen);
            auto const m = std::uniform_int_distribution<std::size_t>(1, 6)(gen);
            // Small integer support forces ties.
            std::uniform_int_distribution<int> value(0, 5);
            std::vector<double> a(n);
            std::vector<double> b(m);
            for (auto& v : a) v = value(gen);
            for (auto& v : b) v = value(gen);
            CHECK(mann_whitney_statistic(a, b) == pairwise_u(a, b));
            CHECK(mann_whitney_exact_p(a, b) == doctest::Approx(brute_force_p(a, b)).epsilon(1e-12));
        }
    }

    TEST_CASE("normal approximation matches the reference at 30 vs 30")
    {
        std::vector<double> a{0.0, 3.7, 7.4, 1.0, 4.7, 8.4, 2.0, 5.7, 9.4, 3.0, 6.7, 0.3, 4.0, 7.7, 1.3,
                              5.0, 8.7, 2.3, 6.0, 9.7, 3.3, 7.0, 0.6, 4.3, 8.0, 1.6, 5.3, 9.0, 2.6, 6.3};
        std::vector<double> b{2.2, 7.5, 3.1, 8.4, 8.4, 9.3, 4.9, 10.2, 5.8, 11.1, 6.7, 2.3, 7.6, 3.2, 8.5,
                              4.1, 9.4, 5.0, 10.3, 5.9, 1.5, 6.8, 2.4, 7.7, 3.3, 8.6, 4.2, 9.5, 5.1, 10.4};
        auto const r = mann_whitney_u(a, b);
        CHECK_FALSE(r.exact);
        CHECK(r.uStatistic == 314.0);
        CHECK(r.pValueTwoSided == doctest::Approx(0.045116355054758604).epsilon(1e-9));
    }

    TEST_CASE("exact and approximate agree for moderate samples")
    {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> a(20);
            std::vector<double> b(20);
            for (auto& v : a) v = noise(gen);
            for (auto& v : b) v = noise(gen) + 0.3;
            CHECK(std::abs(mann_whitney_exact_p(a, b) - mann_whitney_asymptotic_p(a, b)) <= 0.02);
        }
    }

    TEST_CASE("degenerate inputs")
    {
        std::vector<double> same{1.0, 1.0, 1.0};
        auto const r = mann_whitney_u(same, same);
        CHECK(r.uStatistic == 4.5);
        CHECK(r.pValueTwoSided == 1.0);
        CHECK(mann_whitney_asymptotic_p(same, same) == 1.0);
        std::vector<double> one{2.0};
        auto const single = mann_whitney_u(one, one);
        CHECK(single.exact);
        CHECK(single.pValueTwoSided == 1.0);
        CHECK_THROWS(mann_whitney_u(std::vector<double>{}, one));
        CHECK(median(std::vector<double>{4, 1, 3, 2}) == 2.5);
        CHECK_THROWS(median(std::vector<double>{}));
    }
}
