#include "gramevo/random.hpp"

#include <stdexcept>

namespace gramevo {

namespace {

// SplitMix64 finalizer.
std::uint64_t mix(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

double Rng::uniform()
{
    // 53 random mantissa bits; never returns 1.0.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double sigma)
{
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("normal draw requires sigma > 0");
    }
    std::normal_distribution<double> dist(0.0, sigma);
    return dist(engine_);
}

std::size_t Rng::below(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("below(0) has no valid result");
    }
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t generation, std::uint64_t index, StreamPurpose purpose)
{
    auto h = mix(seed);
    h = mix(h ^ static_cast<std::uint64_t>(purpose));
    h = mix(h ^ generation);
    return mix(h ^ index);
}

} // namespace gramevo
