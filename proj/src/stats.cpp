#include "gramevo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gramevo {

namespace {

void require_samples(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("Mann-Whitney test needs two non-empty samples");
    }
}

struct Pooled {
    // Twice the midrank of each pooled value; first a.size() entries belong to a.
    std::vector<std::int64_t> doubledRanks;
    // Tie group sizes.
    std::vector<std::size_t> ties;
};

Pooled pool(std::span<const double> a, std::span<const double> b)
{
    std::vector<std::pair<double, std::size_t>> values;
    values.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) values.emplace_back(a[i], i);
    for (std::size_t i = 0; i < b.size(); ++i) values.emplace_back(b[i], a.size() + i);
    std::sort(values.begin(), values.end());

    Pooled p;
    p.doubledRanks.assign(values.size(), 0);
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j + 1 < values.size() && values[j + 1].first == values[i].first) {
            ++j;
        }
        // Ranks i+1 .. j+1 share the midrank (i + j + 2) / 2.
        auto const doubled = static_cast<std::int64_t>(i + j + 2);
        for (auto k = i; k <= j; ++k) {
            p.doubledRanks[values[k].second] = doubled;
        }
        p.ties.push_back(j - i + 1);
        i = j + 1;
    }
    return p;
}

} // namespace

double mann_whitney_statistic(std::span<const double> a, std::span<const double> b)
{
    require_samples(a, b);
    auto const p = pool(a, b);
    std::int64_t doubledSum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        doubledSum += p.doubledRanks[i];
    }
    auto const n = static_cast<double>(a.size());
    return static_cast<double>(doubledSum) / 2.0 - n * (n + 1.0) / 2.0;
}

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b)
{
    require_samples(a, b);
    auto const p = pool(a, b);
    auto const n = a.size();
    auto const total = p.doubledRanks.size();

    std::int64_t observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        observed += p.doubledRanks[i];
    }
    auto const maxSum = std::accumulate(p.doubledRanks.begin(), p.doubledRanks.end(), std::int64_t{0});

    // ways[k][s]: subsets of k pooled items whose doubled ranks sum to s.
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(static_cast<std::size_t>(maxSum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t item = 0; item < total; ++item) {
        auto const r = static_cast<std::size_t>(p.doubledRanks[item]);
        for (std::size_t k = std::min(n, item + 1); k >= 1; --k) {
            auto& dst = ways[k];
            auto const& src = ways[k - 1];
            for (std::size_t s = dst.size() - 1; s >= r; --s) {
                dst[s] += src[s - r];
                if (s == r) break;
            }
        }
    }
    double lower = 0.0;
    double upper = 0.0;
    double all = 0.0;
    for (std::size_t s = 0; s < ways[n].size(); ++s) {
        auto const w = ways[n][s];
        all += w;
        if (static_cast<std::int64_t>(s) <= observed) lower += w;
        if (static_cast<std::int64_t>(s) >= observed) upper += w;
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

double mann_whitney_asymptotic_p(std::span<const double> a, std::span<const double> b)
{
    require_samples(a, b);
    auto const u = mann_whitney_statistic(a, b);
    auto const p = pool(a, b);
    auto const n = static_cast<double>(a.size());
    auto const m = static_cast<double>(b.size());
    auto const total = n + m;
    double tieSum = 0.0;
    for (auto t : p.ties) {
        auto const td = static_cast<double>(t);
        tieSum += td * td * td - td;
    }
    double const variance = n * m / 12.0 * ((total + 1.0) - tieSum / (total * (total - 1.0)));
    if (!(variance > 0.0)) {
        return 1.0;
    }
    double const z = (std::abs(u - n * m / 2.0) - 0.5) / std::sqrt(variance);
    return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

ComparisonResult mann_whitney_u(std::span<const double> a, std::span<const double> b)
{
    require_samples(a, b);
    ComparisonResult r;
    r.uStatistic = mann_whitney_statistic(a, b);
    r.exact = a.size() + b.size() <= 20;
    r.pValueTwoSided = r.exact ? mann_whitney_exact_p(a, b) : mann_whitney_asymptotic_p(a, b);
    r.medianA = median(a);
    r.medianB = median(b);
    r.nA = a.size();
    r.nB = b.size();
    return r;
}

double median(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    auto const mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

} // namespace gramevo
