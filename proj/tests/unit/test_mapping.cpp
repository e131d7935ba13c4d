#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gramevo/dataset.hpp"
#include "gramevo/expression.hpp"
#include "gramevo/grammar.hpp"
#include "gramevo/mapping.hpp"
#include "unit/helpers.hpp"

using namespace gramevo;

namespace {

struct Replay {
    std::string phenotype;
    std::size_t depth = 0;
};

// Re-derives a phenotype from a genotype that holds every codon needed.
Replay replay(const Genotype& genotype, const Grammar& g, std::size_t maxDepth)
{
    Replay out;
    std::vector<std::size_t> cursor(g.size(), 0);
    std::function<void(std::size_t, std::size_t)> go = [&](std::size_t nt, std::size_t level) {
        out.depth = std::max(out.depth, level);
        auto const candidates = depth_candidates(g[nt], level, maxDepth);
        auto const r = select_rule(g[nt], candidates, genotype.lists.at(nt).at(cursor[nt]++));
        for (auto const& sym : g[nt].rules[r].body) {
            if (sym.is_terminal()) {
                out.depth = std::max(out.depth, level + 1);
                out.phenotype += (out.phenotype.empty() ? "" : " ") + sym.text;
            } else {
                go(sym.ref, level + 1);
            }
        }
    };
    go(g.start(), 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(cursor[i] == genotype.lists[i].size());
    }
    return out;
}

Expression postfix(std::vector<ExprNode> nodes) { return Expression(std::move(nodes)); }
ExprNode var(std::uint32_t i) { return {OpCode::Variable, 0.0, i}; }
ExprNode num(double v) { return {OpCode::Constant, v, 0}; }
ExprNode op(OpCode o) { return {o, 0.0, 0}; }

} // namespace

TEST_SUITE("mapping")
{
    TEST_CASE("explicit genotype maps to x[0]")
    {
        auto const g = parse_bnf(testing::kStandardGrammar);
        auto const genotype = Genotype::from_named(g, {{"start", {0.0}}, {"expr", {0.9}}, {"var", {0.9}}});
        testing::ScriptedRandom rng;
        auto const m = map_genotype(genotype, g, 10, rng);
        CHECK(m.derivation.phenotype == "x[0]");
        // start, expr, var, x[0]
        CHECK(m.derivation.depth == 4);
        CHECK(m.derivation.expansionCounts[0] == std::vector<std::size_t>{1});
        CHECK(m.derivation.expansionCounts[1] == std::vector<std::size_t>{0, 0, 1});
        CHECK(m.derivation.expansionCounts[4] == std::vector<std::size_t>{0, 1});
        CHECK(m.genotype == genotype);
        CHECK(rng.calls() == 0);
        REQUIRE(m.derivation.tree.has_value());
        CHECK(render_tree(*m.derivation.tree) == "x[0]");
    }

    TEST_CASE("all-zero codons at depth 6")
    {
        // expr at levels 2 and 3 can still recurse; at level 4 only <var> fits.
        auto const g = parse_bnf(testing::kStandardGrammar);
        testing::ConstantRandom rng(0.0);
        auto const m = map_genotype(Genotype::empty(g), g, 6, rng);
        CHECK(m.derivation.phenotype == "1.0 + 1.0 + 1.0 + 1.0");
        CHECK(m.derivation.depth == 6);
        CHECK(m.derivation.expansionCounts[1] == std::vector<std::size_t>{3, 0, 4});
        CHECK(m.derivation.consumed == std::vector<std::size_t>{1, 7, 3, 0, 4});
        REQUIRE(m.derivation.tree.has_value());
        CHECK(render_tree(*m.derivation.tree) == "((1.0 + 1.0) + (1.0 + 1.0))");
    }

    TEST_CASE("too shallow a bound takes the shortest derivation")
    {
        auto const g = parse_bnf(testing::kStandardGrammar);
        gramevo::Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            auto const m = map_genotype(Genotype::empty(g), g, 1, rng);
            CHECK(m.derivation.expansionCounts[1][0] == 0);
            CHECK(m.derivation.expansionCounts[1][1] == 0);
            CHECK(m.derivation.depth == 4);
        }
        CHECK_THROWS(map_genotype(Genotype::empty(g), g, 0, rng));
    }

    TEST_CASE("mapping is deterministic and the trimmed genotype replays")
    {
        auto const g = parse_bnf(testing::kStandardGrammar, 2);
        gramevo::Rng rng(42);
        for (int i = 0; i < 500; ++i) {
            auto const genotype = random_individual_genotype(g, 8, rng);
            testing::ScriptedRandom none;
            auto const a = map_genotype(genotype, g, 8, none);
            auto const b = map_genotype(genotype, g, 8, none);
            CHECK(a.derivation == b.derivation);
            CHECK(a.genotype == genotype);
            CHECK(none.calls() == 0);

            auto const r = replay(genotype, g, 8);
            CHECK(r.phenotype == a.derivation.phenotype);
            CHECK(r.depth == a.derivation.depth);
        }
    }

    TEST_CASE("extra codons are trimmed and missing ones drawn")
    {
        auto const g = parse_bnf(testing::kStandardGrammar);
        auto padded = Genotype::from_named(g, {{"start", {0.0, 0.5, 0.5}}, {"expr", {0.9, 0.1}}, {"var", {0.9, 0.3}}});
        testing::ScriptedRandom rng;
        auto const m = map_genotype(padded, g, 10, rng);
        CHECK(m.genotype == Genotype::from_named(g, {{"start", {0.0}}, {"expr", {0.9}}, {"var", {0.9}}}));

        testing::ScriptedRandom draws({0.9, 0.0});
        auto const filled = map_genotype(Genotype::from_named(g, {{"start", {0.0}}}), g, 10, draws);
        CHECK(filled.derivation.phenotype == "1.0");
        CHECK(filled.genotype == Genotype::from_named(g, {{"start", {0.0}}, {"expr", {0.9}}, {"var", {0.0}}}));
    }

    TEST_CASE("invalid genotypes are rejected")
    {
        auto const g = parse_bnf(testing::kStandardGrammar);
        testing::ScriptedRandom rng;
        CHECK_THROWS(map_genotype(Genotype::from_named(g, {{"expr", {1.0}}}), g, 10, rng));
        Genotype tooMany{std::vector<std::vector<double>>(g.size() + 1)};
        CHECK_THROWS(map_genotype(tooMany, g, 10, rng));
    }

    TEST_CASE("depth bound holds for random individuals")
    {
        for (auto const* text : {testing::kStandardGrammar, testing::kGroupedGrammar}) {
            for (std::size_t dims : {1, 2}) {
                auto const g = parse_bnf(text, dims);
                gramevo::Rng rng(dims * 101);
                for (int i = 0; i < 10000; ++i) {
                    auto const m = map_genotype(Genotype::empty(g), g, 9, rng);
                    CHECK(m.derivation.depth <= 9);
                    std::size_t expansions = 0;
                    for (std::size_t n = 0; n < g.size(); ++n) {
                        std::size_t perNt = 0;
                        for (auto c : m.derivation.expansionCounts[n]) perNt += c;
                        CHECK(perNt == m.derivation.consumed[n]);
                        CHECK(perNt == m.genotype.lists[n].size());
                        expansions += perNt;
                    }
                    CHECK(expansions == m.genotype.codon_count());
                    CHECK(m.derivation.tree.has_value());
                }
            }
        }
    }

    TEST_CASE("concentrated probabilities give a constant phenotype")
    {
        auto const base = parse_bnf(testing::kStandardGrammar);
        auto probs = base.probabilities();
        probs[1] = {0.0, 0.0, 1.0};
        probs[4] = {1.0, 0.0};
        auto const g = base.with_probabilities(probs);
        gramevo::Rng rng(9);
        for (int i = 0; i < 1000; ++i) {
            CHECK(map_genotype(Genotype::empty(g), g, 10, rng).derivation.phenotype == "1.0");
        }
    }

    TEST_CASE("terminals outside the arithmetic vocabulary give no tree")
    {
        auto const g = parse_bnf("<s> ::= hello <v>\n<v> ::= x[0]\n");
        testing::ConstantRandom rng(0.0);
        auto const m = map_genotype(Genotype::empty(g), g, 5, rng);
        CHECK(m.derivation.phenotype == "hello x[0]");
        CHECK_FALSE(m.derivation.tree.has_value());
    }

    TEST_CASE("prefix operators build trees")
    {
        auto const g = parse_bnf("<e> ::= <op> <e> <e> | x[0] | 2\n<op> ::= -\n");
        testing::ScriptedRandom rng({0.0, 0.0, 0.5, 0.9});
        auto const m = map_genotype(Genotype::empty(g), g, 5, rng);
        CHECK(m.derivation.phenotype == "- x[0] 2");
        REQUIRE(m.derivation.tree.has_value());
        CHECK(eval_tree(*m.derivation.tree, std::vector<double>{5.0}) == 3.0);
    }
}

TEST_SUITE("expression")
{
    TEST_CASE("render and evaluate")
    {
        auto const sum = postfix({var(0), num(1.0), op(OpCode::Add)});
        CHECK(render_tree(sum) == "(x[0] + 1.0)");
        CHECK(eval_tree(sum, std::vector<double>{2.0}) == 3.0);

        auto const root = postfix({var(0), op(OpCode::Sqrt)});
        CHECK(render_tree(root) == "sqrt(x[0])");
        CHECK(eval_tree(root, std::vector<double>{-4.0}) == 2.0);

        auto const ratio = postfix({var(0), var(1), op(OpCode::Div)});
        CHECK(eval_tree(ratio, std::vector<double>{5.0, 0.0}) == 1.0);
        CHECK(eval_tree(ratio, std::vector<double>{5.0, 2.0}) == 2.5);
        CHECK(eval_tree(ratio, std::vector<double>{5.0, 1e-10}) == 1.0);

        auto const trig = postfix({num(0.0), op(OpCode::Cos), num(0.0), op(OpCode::Sin), op(OpCode::Sub)});
        CHECK(eval_tree(trig, std::vector<double>{}) == 1.0);
        CHECK(render_tree(trig) == "(cos(0.0) - sin(0.0))");
    }

    TEST_CASE("saturation and errors")
    {
        auto const sq = postfix({var(0), op(OpCode::Square)});
        CHECK(eval_tree(sq, std::vector<double>{1e5}) == doctest::Approx(1e10));
        CHECK(std::isinf(eval_tree(sq, std::vector<double>{1e7})));
        CHECK_THROWS_AS(eval_tree(postfix({var(3)}), std::vector<double>{1.0}), std::out_of_range);
        CHECK_THROWS(eval_tree(Expression{}, std::vector<double>{1.0}));
        CHECK_THROWS(Expression({op(OpCode::Add)}));
        CHECK_THROWS(Expression({num(1.0), num(2.0)}));
        CHECK(postfix({var(0), var(2), op(OpCode::Mul)}).max_variable() == 2u);
        CHECK_FALSE(postfix({num(1.0)}).max_variable().has_value());
    }

    TEST_CASE("exact quartic has zero error")
    {
        // x + x*x + x*x*x + x*x*x*x
        auto const tree = postfix({var(0), var(0), var(0), op(OpCode::Mul), op(OpCode::Add), var(0), var(0),
                                   op(OpCode::Mul), var(0), op(OpCode::Mul), op(OpCode::Add), var(0), var(0),
                                   op(OpCode::Mul), var(0), op(OpCode::Mul), var(0), op(OpCode::Mul), op(OpCode::Add)});
        auto const data = make_quartic();
        CHECK(rmse_on(tree, data, data.train_rows()) <= 1e-12);
    }
}
