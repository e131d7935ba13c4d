#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gramevo {

/// Raised for malformed grammar text, invalid grammar structure and invalid
/// grouping specs. Line and column are 1-based; 0 means "not applicable".
class GrammarError : public std::runtime_error {
public:
    explicit GrammarError(const std::string& message, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

enum class SymbolKind { Terminal, NonTerminal };

struct Symbol {
    SymbolKind kind = SymbolKind::Terminal;
    std::string text;
    // Index of the referenced non-terminal in the owning grammar (non-terminals only).
    std::size_t ref = 0;

    bool is_terminal() const noexcept { return kind == SymbolKind::Terminal; }
    bool is_non_terminal() const noexcept { return kind == SymbolKind::NonTerminal; }

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct ProductionRule {
    std::vector<Symbol> body;
    double probability = 0.0;
    // True iff the head can be re-derived from the body.
    bool recursive = false;
    // Height of the shallowest derivation tree rooted at this rule, counting
    // the head node and terminal leaves as levels.
    std::size_t min_height = 0;

    friend bool operator==(const ProductionRule&, const ProductionRule&) = default;
};

struct NonTerminal {
    std::string name;
    std::vector<ProductionRule> rules;
    std::size_t min_height = 0;

    friend bool operator==(const NonTerminal&, const NonTerminal&) = default;
};

/// Structure of a grammar before analysis: names, bodies and probabilities.
/// Non-terminal references inside bodies are resolved by name.
struct RawNonTerminal {
    std::string name;
    std::vector<std::vector<Symbol>> alternatives;
    std::vector<double> probabilities; // empty = uniform
};

/// A validated probabilistic context-free grammar. Immutable; all
/// transformations produce new values.
class Grammar {
public:
    /// Resolves references, computes recursion flags and minimal heights and
    /// validates the structural invariants. Every non-terminal must be able to
    /// derive a terminal string. Start symbol is the first entry.
    explicit Grammar(std::vector<RawNonTerminal> nonTerminals);

    const std::vector<NonTerminal>& non_terminals() const noexcept { return nonTerminals_; }
    std::size_t size() const noexcept { return nonTerminals_.size(); }
    const NonTerminal& operator[](std::size_t i) const { return nonTerminals_.at(i); }

    std::size_t start() const noexcept { return 0; }
    const std::string& start_symbol() const { return nonTerminals_.front().name; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws GrammarError when the name is unknown.
    std::size_t index_of(std::string_view name) const;

    std::size_t rule_count() const;

    std::vector<std::vector<double>> probabilities() const;

    /// Copy with replaced rule probabilities. Shape and the [0,1] range are
    /// checked; per-non-terminal sums are not (see normalize_check).
    Grammar with_probabilities(const std::vector<std::vector<double>>& probabilities) const;

    /// Copy with every non-terminal reset to 1/k per rule.
    Grammar with_uniform_probabilities() const;

    std::vector<RawNonTerminal> raw() const;

    friend bool operator==(const Grammar&, const Grammar&) = default;

private:
    Grammar() = default;
    void analyze();

    std::vector<NonTerminal> nonTerminals_;
};

/// Parses the BNF text format. Each `x[n]` terminal is expanded into
/// `x[0] | ... | x[dimensions-1]`.
Grammar parse_bnf(std::string_view text, std::size_t dimensions = 1);
Grammar load_bnf(const std::string& path, std::size_t dimensions = 1);

/// Renders in the same format parse_bnf accepts (probabilities are not kept).
std::string render(const Grammar& grammar);

/// True iff every non-terminal's probabilities sum to 1 within 1e-9.
bool normalize_check(const Grammar& grammar);

/// Codon to rule index over all rules (allowRecursive) or over the
/// non-recursive rules only, renormalized. Throws GrammarError when the
/// candidate set is empty.
std::size_t rule_for_codon(const Grammar& grammar, std::size_t nonTerminal, double codon, bool allowRecursive);
std::size_t rule_for_codon(const Grammar& grammar, std::string_view nonTerminal, double codon, bool allowRecursive);

/// Selection over an explicit candidate set (rule indices in increasing
/// order). Picks the smallest candidate j with codon < sum of renormalized
/// probabilities up to j. Zero total mass falls back to uniform weights.
std::size_t select_rule(const NonTerminal& nonTerminal, std::span<const std::size_t> candidates, double codon);

/// Rules of a non-terminal expanded at `level` whose shallowest completion
/// stays within maxDepth; when none fits, the minimal-height rules.
std::vector<std::size_t> depth_candidates(const NonTerminal& nonTerminal, std::size_t level, std::size_t maxDepth);

struct GroupSplit {
    std::string newName;
    std::vector<std::size_t> ruleIndices;
};

struct GroupingEntry {
    std::string source;
    std::vector<GroupSplit> groups;
};

struct GroupingSpec {
    std::vector<GroupingEntry> entries;
};

/// Parses lines of the form `split <source> -> <newName>: i,j,k`. Lines with
/// the same source are merged into one entry.
GroupingSpec parse_grouping_spec(std::string_view text);
GroupingSpec load_grouping_spec(const std::string& path);

/// Moves the listed rules of each source into fresh non-terminals placed
/// right after the source; the source keeps its other rules plus one
/// `<newName>` rule per group. Probabilities are reset to uniform.
Grammar apply_function_grouping(const Grammar& grammar, const GroupingSpec& spec);

/// Every phenotype (space-joined terminals) derivable under the same
/// depth-limit rule as the genotype mapping.
std::set<std::string> enumerate_language(const Grammar& grammar, std::size_t maxDepth);

} // namespace gramevo
