#include "gramevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gramevo {

MutationArray MutationArray::filled(const Grammar& grammar, double rate)
{
    return MutationArray{std::vector<double>(grammar.size(), rate)};
}

void EvolutionConfig::validate() const
{
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (populationSize < 1) throw std::invalid_argument("population_size must be at least 1");
    if (generations < 1) throw std::invalid_argument("generations must be at least 1");
    if (tournamentSize < 1) throw std::invalid_argument("tournament_size must be at least 1");
    if (eliteSize > populationSize) throw std::invalid_argument("elite_size must not exceed population_size");
    if (!unit(crossoverProbability)) throw std::invalid_argument("crossover_probability must lie in [0,1]");
    if (!unit(startingMutationProbability)) throw std::invalid_argument("starting_mutation_probability must lie in [0,1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and non-negative");
    if (!unit(learningFactor)) throw std::invalid_argument("learning_factor must lie in [0,1]");
    if (maxDepth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (!std::isfinite(worstFitness)) throw std::invalid_argument("worst_fitness must be finite");
}

namespace {

double fitness_or_inf(Individual const& ind)
{
    return ind.fitness.value_or(std::numeric_limits<double>::infinity());
}

} // namespace

std::size_t tournament_select(std::span<const Individual> population, std::size_t tournamentSize, RandomSource& rng)
{
    if (population.empty()) {
        throw std::invalid_argument("tournament on an empty population");
    }
    if (tournamentSize < 1) {
        throw std::invalid_argument("tournament size must be at least 1");
    }
    std::size_t winner = rng.below(population.size());
    for (std::size_t k = 1; k < tournamentSize; ++k) {
        auto const challenger = rng.below(population.size());
        auto const fc = fitness_or_inf(population[challenger]);
        auto const fw = fitness_or_inf(population[winner]);
        if (fc < fw || (fc == fw && challenger < winner)) {
            winner = challenger;
        }
    }
    return winner;
}

Individual crossover(const Individual& parentA, const Individual& parentB, RandomSource& rng)
{
    auto const lists = std::max(parentA.genotype.lists.size(), parentB.genotype.lists.size());
    Individual child;
    child.genotype.lists.resize(lists);
    for (std::size_t i = 0; i < lists; ++i) {
        auto const& donor = rng.uniform() < 0.5 ? parentA : parentB;
        if (i < donor.genotype.lists.size()) {
            child.genotype.lists[i] = donor.genotype.lists[i];
        }
    }
    child.mutation = fitness_or_inf(parentB) < fitness_or_inf(parentA) ? parentB.mutation : parentA.mutation;
    return child;
}

Individual facilitated_mutate(Individual individual, const Grammar& grammar, RandomSource& rng)
{
    auto& lists = individual.genotype.lists;
    if (lists.size() > grammar.size() || individual.mutation.rates.size() != grammar.size()) {
        throw std::invalid_argument("individual does not match the grammar's non-terminals");
    }
    for (std::size_t nt = 0; nt < lists.size(); ++nt) {
        auto const rate = individual.mutation.rates[nt];
        for (auto& codon : lists[nt]) {
            if (rng.uniform() < rate) {
                codon = rng.uniform();
            }
        }
    }
    individual.fitness.reset();
    individual.derivation.reset();
    return individual;
}

void perturb_mutation_arrays(std::span<Individual> population, double sigma,
                             const std::function<RandomSource&(std::size_t)>& streamFor)
{
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return;
    }
    for (std::size_t i = 0; i < population.size(); ++i) {
        auto& rng = streamFor(i);
        for (auto& rate : population[i].mutation.rates) {
            rate = std::clamp(rate + rng.normal(sigma), 0.0, 1.0);
        }
    }
}

void perturb_mutation_arrays(std::span<Individual> population, double sigma, RandomSource& rng)
{
    perturb_mutation_arrays(population, sigma, [&rng](std::size_t) -> RandomSource& { return rng; });
}

Grammar update_pcfg(const Grammar& grammar, const DerivationResult& best, double learningFactor)
{
    if (!(learningFactor >= 0.0 && learningFactor <= 1.0)) {
        throw std::invalid_argument("learning factor must lie in [0,1]");
    }
    auto const& counts = best.expansionCounts;
    if (counts.size() != grammar.size()) {
        throw std::invalid_argument("expansion counts do not match the grammar's non-terminals");
    }
    auto probabilities = grammar.probabilities();
    for (std::size_t nt = 0; nt < grammar.size(); ++nt) {
        if (counts[nt].size() != probabilities[nt].size()) {
            throw std::invalid_argument("expansion counts for <" + grammar[nt].name + "> do not match its rules");
        }
        auto const total = std::accumulate(counts[nt].begin(), counts[nt].end(), std::size_t{0});
        if (total == 0) {
            continue;
        }
        for (std::size_t r = 0; r < probabilities[nt].size(); ++r) {
            auto const observed = static_cast<double>(counts[nt][r]) / static_cast<double>(total);
            probabilities[nt][r] = (1.0 - learningFactor) * probabilities[nt][r] + learningFactor * observed;
        }
    }
    return grammar.with_probabilities(probabilities);
}

namespace {

class Engine {
public:
    Engine(EvolutionConfig const& config, Grammar const& grammar, FitnessFunction const& fitness,
           FitnessFunction const& testFitness)
        : config_(config), grammar_(grammar), fitness_(fitness), testFitness_(testFitness)
    {
        config_.validate();
        if (!fitness_) {
            throw std::invalid_argument("evolve requires a fitness function");
        }
        log_.nonTerminals.reserve(grammar.size());
        for (auto const& nt : grammar.non_terminals()) {
            log_.nonTerminals.push_back(nt.name);
            log_.rulesPerNonTerminal.push_back(nt.rules.size());
        }
    }

    EvolutionResult run()
    {
        std::vector<Individual> population;
        population.reserve(config_.populationSize);
        for (std::size_t i = 0; i < config_.populationSize; ++i) {
            auto rng = make_stream(config_.seed, 0, i, StreamPurpose::Initialization);
            Individual ind;
            ind.genotype = random_individual_genotype(grammar_, config_.maxDepth, rng);
            ind.mutation = MutationArray::filled(grammar_, config_.startingMutationProbability);
            population.push_back(std::move(ind));
        }

        std::optional<Individual> runBest;
        for (std::size_t gen = 0; gen < config_.generations; ++gen) {
            evaluate(population, gen);
            auto const order = ranking(population);
            auto const& best = population[order.front()];
            if (!runBest || *best.fitness < *runBest->fitness) {
                runBest = best;
            }
            record(population, best, gen);
            if (gen + 1 == config_.generations) {
                break;
            }

            std::vector<Individual> next;
            next.reserve(config_.populationSize);
            for (std::size_t e = 0; e < config_.eliteSize; ++e) {
                next.push_back(population[order[e]]);
            }
            for (std::size_t i = next.size(); i < config_.populationSize; ++i) {
                auto rng = make_stream(config_.seed, gen, i, StreamPurpose::Breeding);
                next.push_back(breed(population, rng));
            }
            if (config_.adaptiveMutation) {
                std::vector<Rng> streams;
                streams.reserve(next.size());
                for (std::size_t i = 0; i < next.size(); ++i) {
                    streams.push_back(make_stream(config_.seed, gen, i, StreamPurpose::Perturbation));
                }
                perturb_mutation_arrays(next, config_.sigma,
                                        [&streams](std::size_t i) -> RandomSource& { return streams[i]; });
            }
            if (config_.adaptivePcfg) {
                grammar_ = update_pcfg(grammar_, *best.derivation, config_.learningFactor);
            }
            population = std::move(next);
        }
        return EvolutionResult{std::move(log_), std::move(*runBest), std::move(grammar_)};
    }

private:
    void evaluate(std::vector<Individual>& population, std::size_t gen)
    {
        for (std::size_t i = 0; i < population.size(); ++i) {
            auto& ind = population[i];
            if (ind.evaluated()) {
                continue;
            }
            auto rng = make_stream(config_.seed, gen, i, StreamPurpose::Mapping);
            auto mapped = map_genotype(ind.genotype, grammar_, config_.maxDepth, rng);
            ind.genotype = std::move(mapped.genotype);
            auto const f = fitness_(mapped.derivation);
            ind.fitness = std::isfinite(f) ? f : config_.worstFitness;
            ind.derivation = std::move(mapped.derivation);
        }
    }

    static std::vector<std::size_t> ranking(std::vector<Individual> const& population)
    {
        std::vector<std::size_t> order(population.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return *population[a].fitness < *population[b].fitness; });
        return order;
    }

    Individual breed(std::vector<Individual> const& population, RandomSource& rng) const
    {
        auto const& a = population[tournament_select(population, config_.tournamentSize, rng)];
        auto const& b = population[tournament_select(population, config_.tournamentSize, rng)];
        Individual child;
        if (rng.uniform() < config_.crossoverProbability) {
            child = crossover(a, b, rng);
        } else {
            child = *b.fitness < *a.fitness ? b : a;
        }
        return facilitated_mutate(std::move(child), grammar_, rng);
    }

    void record(std::vector<Individual> const& population, Individual const& best, std::size_t gen)
    {
        GenerationRecord rec;
        rec.generation = gen;
        rec.bestFitness = *best.fitness;
        rec.bestPhenotype = best.derivation->phenotype;
        rec.bestTestFitness = std::numeric_limits<double>::quiet_NaN();
        if (testFitness_) {
            auto const t = testFitness_(*best.derivation);
            rec.bestTestFitness = std::isinf(t) ? config_.worstFitness : t;
        }
        // Running means stay exact when every value is equal.
        rec.meanFitness = 0.0;
        rec.meanMutationRate.assign(grammar_.size(), 0.0);
        double k = 0.0;
        for (auto const& ind : population) {
            k += 1.0;
            rec.meanFitness += (*ind.fitness - rec.meanFitness) / k;
            for (std::size_t nt = 0; nt < grammar_.size(); ++nt) {
                rec.meanMutationRate[nt] += (ind.mutation.rates[nt] - rec.meanMutationRate[nt]) / k;
            }
        }
        rec.bestMutationRate = best.mutation.rates;
        rec.ruleProbabilities = grammar_.probabilities();
        log_.generations.push_back(std::move(rec));
    }

    EvolutionConfig config_;
    Grammar grammar_;
    FitnessFunction const& fitness_;
    FitnessFunction const& testFitness_;
    RunLog log_;
};

} // namespace

EvolutionResult evolve(const EvolutionConfig& config, const Grammar& grammar, const FitnessFunction& fitness,
                       const FitnessFunction& testFitness)
{
    return Engine(config, grammar, fitness, testFitness).run();
}

} // namespace gramevo
