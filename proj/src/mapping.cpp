#include "gramevo/mapping.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace gramevo {

Genotype Genotype::empty(const Grammar& grammar)
{
    return Genotype{std::vector<std::vector<double>>(grammar.size())};
}

Genotype Genotype::from_named(const Grammar& grammar, const std::map<std::string, std::vector<double>>& named)
{
    auto g = empty(grammar);
    for (auto const& [name, codons] : named) {
        g.lists[grammar.index_of(name)] = codons;
    }
    return g;
}

std::map<std::string, std::vector<double>> Genotype::to_named(const Grammar& grammar) const
{
    std::map<std::string, std::vector<double>> out;
    for (std::size_t i = 0; i < lists.size() && i < grammar.size(); ++i) {
        out[grammar[i].name] = lists[i];
    }
    return out;
}

std::size_t Genotype::codon_count() const
{
    std::size_t n = 0;
    for (auto const& l : lists) {
        n += l.size();
    }
    return n;
}

namespace {

enum class ItemKind { None, Token, Expr, Invalid };

struct Item {
    ItemKind kind = ItemKind::None;
    OpCode op = OpCode::Constant;
};

std::optional<std::uint32_t> parse_variable(std::string_view t)
{
    if (t.size() < 4 || t.substr(0, 2) != "x[" || t.back() != ']') {
        return std::nullopt;
    }
    auto digits = t.substr(2, t.size() - 3);
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<double> parse_constant(std::string_view t)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        return std::nullopt;
    }
    return v;
}

class Mapper {
public:
    Mapper(Genotype const& genotype, Grammar const& grammar, std::size_t maxDepth, RandomSource& rng)
        : grammar_(grammar), maxDepth_(maxDepth), rng_(rng), input_(genotype)
    {
        if (input_.lists.size() > grammar.size()) {
            throw std::invalid_argument("genotype has more codon lists than the grammar has non-terminals");
        }
        input_.lists.resize(grammar.size());
        for (auto const& list : input_.lists) {
            for (auto c : list) {
                if (!(c >= 0.0 && c < 1.0)) {
                    throw std::invalid_argument("codon outside [0,1)");
                }
            }
        }
        result_.derivation.expansionCounts.resize(grammar.size());
        for (std::size_t i = 0; i < grammar.size(); ++i) {
            result_.derivation.expansionCounts[i].assign(grammar[i].rules.size(), 0);
        }
        result_.derivation.consumed.assign(grammar.size(), 0);
        result_.genotype = Genotype::empty(grammar);
    }

    MappingResult run()
    {
        auto const root = expand(grammar_.start(), 1);
        auto& d = result_.derivation;
        if (treeValid_ && root.kind == ItemKind::Expr) {
            d.tree = Expression(std::move(postfix_));
        }
        return std::move(result_);
    }

private:
    double next_codon(std::size_t nt)
    {
        auto& used = result_.derivation.consumed[nt];
        auto const& list = input_.lists[nt];
        double codon = used < list.size() ? list[used] : rng_.uniform();
        ++used;
        result_.genotype.lists[nt].push_back(codon);
        return codon;
    }

    void visit_level(std::size_t level) { result_.derivation.depth = std::max(result_.derivation.depth, level); }

    Item terminal_item(std::string const& text)
    {
        if (auto v = parse_variable(text)) {
            postfix_.push_back({OpCode::Variable, 0.0, *v});
            return {ItemKind::Expr};
        }
        if (auto op = operator_for_terminal(text)) {
            return {ItemKind::Token, *op};
        }
        if (auto c = parse_constant(text)) {
            postfix_.push_back({OpCode::Constant, *c, 0});
            return {ItemKind::Expr};
        }
        if (text == "(" || text == ")" || text == ",") {
            return {ItemKind::None};
        }
        return {ItemKind::Invalid};
    }

    Item combine(std::vector<Item> const& items)
    {
        auto is = [&](std::size_t i, ItemKind k) { return items[i].kind == k; };
        if (items.size() == 1) {
            return items[0];
        }
        if (items.size() == 2 && is(0, ItemKind::Token) && arity(items[0].op) == 1 && is(1, ItemKind::Expr)) {
            postfix_.push_back({items[0].op, 0.0, 0});
            return {ItemKind::Expr};
        }
        if (items.size() == 3) {
            if (is(0, ItemKind::Expr) && is(1, ItemKind::Token) && arity(items[1].op) == 2 && is(2, ItemKind::Expr)) {
                postfix_.push_back({items[1].op, 0.0, 0});
                return {ItemKind::Expr};
            }
            if (is(0, ItemKind::Token) && arity(items[0].op) == 2 && is(1, ItemKind::Expr) && is(2, ItemKind::Expr)) {
                postfix_.push_back({items[0].op, 0.0, 0});
                return {ItemKind::Expr};
            }
        }
        treeValid_ = false;
        return {ItemKind::Invalid};
    }

    Item expand(std::size_t nt, std::size_t level)
    {
        visit_level(level);
        auto const& nonTerminal = grammar_[nt];
        auto const candidates = depth_candidates(nonTerminal, level, maxDepth_);
        auto const r = select_rule(nonTerminal, candidates, next_codon(nt));
        ++result_.derivation.expansionCounts[nt][r];

        std::vector<Item> items;
        for (auto const& sym : nonTerminal.rules[r].body) {
            Item item;
            if (sym.is_terminal()) {
                visit_level(level + 1);
                append_terminal(sym.text);
                item = terminal_item(sym.text);
            } else {
                item = expand(sym.ref, level + 1);
            }
            if (item.kind == ItemKind::Invalid) {
                treeValid_ = false;
            }
            if (item.kind != ItemKind::None) {
                items.push_back(item);
            }
        }
        if (items.empty()) {
            return {ItemKind::None};
        }
        return combine(items);
    }

    void append_terminal(std::string const& text)
    {
        auto& p = result_.derivation.phenotype;
        if (!p.empty()) {
            p.push_back(' ');
        }
        p += text;
    }

    Grammar const& grammar_;
    std::size_t maxDepth_;
    RandomSource& rng_;
    Genotype input_;
    MappingResult result_;
    std::vector<ExprNode> postfix_;
    bool treeValid_ = true;
};

} // namespace

MappingResult map_genotype(const Genotype& genotype, const Grammar& grammar, std::size_t maxDepth, RandomSource& rng)
{
    if (maxDepth < 1) {
        throw std::invalid_argument("maxDepth must be at least 1");
    }
    return Mapper(genotype, grammar, maxDepth, rng).run();
}

Genotype random_individual_genotype(const Grammar& grammar, std::size_t maxDepth, RandomSource& rng)
{
    return map_genotype(Genotype::empty(grammar), grammar, maxDepth, rng).genotype;
}

} // namespace gramevo
