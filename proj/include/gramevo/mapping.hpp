#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gramevo/expression.hpp"
#include "gramevo/grammar.hpp"
#include "gramevo/random.hpp"

namespace gramevo {

/// One ordered list of float codons per non-terminal, aligned with the
/// grammar's non-terminal order.
struct Genotype {
    std::vector<std::vector<double>> lists;

    static Genotype empty(const Grammar& grammar);
    static Genotype from_named(const Grammar& grammar, const std::map<std::string, std::vector<double>>& named);

    std::map<std::string, std::vector<double>> to_named(const Grammar& grammar) const;
    std::size_t codon_count() const;

    friend bool operator==(const Genotype&, const Genotype&) = default;
};

struct DerivationResult {
    std::string phenotype;
    // Absent when the derivation does not read as an arithmetic expression.
    std::optional<Expression> tree;
    // Tree levels, start symbol = 1, terminal leaves included.
    std::size_t depth = 0;
    std::vector<std::vector<std::size_t>> expansionCounts;
    std::vector<std::size_t> consumed;

    friend bool operator==(const DerivationResult&, const DerivationResult&) = default;
};

struct MappingResult {
    DerivationResult derivation;
    // The input genotype trimmed (or extended) to exactly the consumed codons.
    Genotype genotype;
};

/// Depth-first leftmost derivation from the start symbol. Each expansion of a
/// non-terminal consumes its next codon (drawing a fresh one from `rng` when
/// the list is exhausted) and picks among the rules that still fit under
/// maxDepth. `rng` is untouched when the genotype already holds enough codons.
MappingResult map_genotype(const Genotype& genotype, const Grammar& grammar, std::size_t maxDepth, RandomSource& rng);

Genotype random_individual_genotype(const Grammar& grammar, std::size_t maxDepth, RandomSource& rng);

} // namespace gramevo
