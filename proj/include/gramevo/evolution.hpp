#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gramevo/grammar.hpp"
#include "gramevo/mapping.hpp"
#include "gramevo/random.hpp"

namespace gramevo {

/// Per-non-terminal mutation probabilities, aligned with the grammar's
/// non-terminal order.
struct MutationArray {
    std::vector<double> rates;

    static MutationArray filled(const Grammar& grammar, double rate);

    friend bool operator==(const MutationArray&, const MutationArray&) = default;
};

struct Individual {
    Genotype genotype;
    MutationArray mutation;
    std::optional<double> fitness;
    std::optional<DerivationResult> derivation;

    bool evaluated() const noexcept { return fitness.has_value(); }
};

struct EvolutionConfig {
    std::size_t populationSize = 100;
    std::size_t generations = 50;
    std::size_t tournamentSize = 3;
    std::size_t eliteSize = 1;
    double crossoverProbability = 0.9;
    double startingMutationProbability = 0.1;
    double sigma = 0.05;
    double learningFactor = 0.01;
    std::size_t maxDepth = 10;
    std::uint64_t seed = 0;
    double worstFitness = 1e10;
    bool adaptivePcfg = true;
    bool adaptiveMutation = true;

    /// Throws std::invalid_argument naming the first violated range.
    void validate() const;
};

struct GenerationRecord {
    std::size_t generation = 0;
    double bestFitness = 0.0;
    double bestTestFitness = 0.0;
    double meanFitness = 0.0;
    std::string bestPhenotype;
    std::vector<double> meanMutationRate;
    std::vector<double> bestMutationRate;
    std::vector<std::vector<double>> ruleProbabilities;
};

struct RunLog {
    std::vector<std::string> nonTerminals;
    std::vector<std::size_t> rulesPerNonTerminal;
    std::vector<GenerationRecord> generations;
};

struct EvolutionResult {
    RunLog log;
    Individual best;
    Grammar finalGrammar;
};

/// Maps a derivation to a fitness (lower is better). Non-finite values are
/// replaced by EvolutionConfig::worstFitness.
using FitnessFunction = std::function<double(const DerivationResult&)>;

/// Index of the lowest-fitness individual among `tournamentSize` uniform
/// draws with replacement; ties go to the earliest draw's lower index.
std::size_t tournament_select(std::span<const Individual> population, std::size_t tournamentSize, RandomSource& rng);

/// Per-non-terminal fair mask: each codon list comes whole from one parent
/// (draw < 0.5 picks parentA). The mutation array is copied from the fitter
/// parent, parentA on ties. The offspring is unevaluated.
Individual crossover(const Individual& parentA, const Individual& parentB, RandomSource& rng);

/// Resamples each codon of non-terminal n uniformly with probability
/// mutation.rates[n]. Leaves the mutation array as is and clears the
/// cached evaluation.
Individual facilitated_mutate(Individual individual, const Grammar& grammar, RandomSource& rng);

/// rate <- clamp(rate + N(0, sigma), 0, 1) with one draw per individual and
/// non-terminal. The stream for individual i comes from `streamFor(i)`.
void perturb_mutation_arrays(std::span<Individual> population, double sigma,
                             const std::function<RandomSource&(std::size_t)>& streamFor);
void perturb_mutation_arrays(std::span<Individual> population, double sigma, RandomSource& rng);

/// p_j <- (1 - lambda) p_j + lambda c_j / t for every non-terminal expanded
/// t > 0 times in `best`; other non-terminals keep their probabilities.
Grammar update_pcfg(const Grammar& grammar, const DerivationResult& best, double learningFactor);

/// Generational loop: evaluate, log, keep elites, breed by tournament,
/// crossover and facilitated mutation, perturb mutation arrays, then learn
/// the PCFG from the generation's best. Pure function of config.seed.
EvolutionResult evolve(const EvolutionConfig& config, const Grammar& grammar, const FitnessFunction& fitness,
                       const FitnessFunction& testFitness = {});

} // namespace gramevo
