#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gramevo {

/// Source of randomness used by every stochastic operator. Tests substitute
/// scripted implementations.
class RandomSource {
public:
    virtual ~RandomSource() = default;

    /// Uniform draw in [0,1).
    virtual double uniform() = 0;
    /// Draw from N(0, sigma); sigma > 0.
    virtual double normal(double sigma) = 0;
    /// Uniform integer in [0, n); n > 0.
    virtual std::size_t below(std::size_t n) = 0;
};

class Rng final : public RandomSource {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() override;
    double normal(double sigma) override;
    std::size_t below(std::size_t n) override;

private:
    std::mt19937_64 engine_;
};

/// Independent streams keyed by role so that skipping one stage never shifts
/// the draws seen by another.
enum class StreamPurpose : std::uint64_t {
    Initialization = 1,
    Mapping = 2,
    Breeding = 3,
    Perturbation = 4,
    DataSplit = 5,
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t generation, std::uint64_t index, StreamPurpose purpose);

inline Rng make_stream(std::uint64_t seed, std::uint64_t generation, std::uint64_t index, StreamPurpose purpose)
{
    return Rng(derive_seed(seed, generation, index, purpose));
}

} // namespace gramevo
