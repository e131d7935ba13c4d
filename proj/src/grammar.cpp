#include "gramevo/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace gramevo {

GrammarError::GrammarError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(line == 0 ? message
                                   : message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line), column_(column)
{
}

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

bool has_whitespace(std::string_view s)
{
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

bool is_name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
}

} // namespace

Grammar::Grammar(std::vector<RawNonTerminal> nonTerminals)
{
    if (nonTerminals.empty()) {
        throw GrammarError("grammar has no non-terminals");
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nonTerminals.size(); ++i) {
        const auto& name = nonTerminals[i].name;
        if (name.empty() || has_whitespace(name)) {
            throw GrammarError("invalid non-terminal name '" + name + "'");
        }
        if (!index.emplace(name, i).second) {
            throw GrammarError("duplicate non-terminal <" + name + ">");
        }
    }

    nonTerminals_.reserve(nonTerminals.size());
    for (auto& raw : nonTerminals) {
        NonTerminal nt;
        nt.name = std::move(raw.name);
        if (raw.alternatives.empty()) {
            throw GrammarError("<" + nt.name + "> has no production rules");
        }
        if (!raw.probabilities.empty() && raw.probabilities.size() != raw.alternatives.size()) {
            throw GrammarError("<" + nt.name + "> probability count does not match rule count");
        }
        auto const k = raw.alternatives.size();
        for (std::size_t r = 0; r < k; ++r) {
            ProductionRule rule;
            rule.body = std::move(raw.alternatives[r]);
            if (rule.body.empty()) {
                throw GrammarError("<" + nt.name + "> has an empty production rule");
            }
            for (auto& sym : rule.body) {
                if (sym.text.empty() || has_whitespace(sym.text)) {
                    throw GrammarError("invalid symbol '" + sym.text + "' in <" + nt.name + ">");
                }
                if (sym.is_non_terminal()) {
                    auto it = index.find(sym.text);
                    if (it == index.end()) {
                        throw GrammarError("undeclared non-terminal <" + sym.text + "> used in <" + nt.name + ">");
                    }
                    sym.ref = it->second;
                } else {
                    sym.ref = 0;
                }
            }
            rule.probability = raw.probabilities.empty() ? 1.0 / static_cast<double>(k) : raw.probabilities[r];
            if (!(rule.probability >= 0.0 && rule.probability <= 1.0)) {
                throw GrammarError("<" + nt.name + "> has a probability outside [0,1]");
            }
            nt.rules.push_back(std::move(rule));
        }
        nonTerminals_.push_back(std::move(nt));
    }
    analyze();
}

void Grammar::analyze()
{
    auto const n = nonTerminals_.size();

    // reach[i][j]: j is derivable from i in one or more steps.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> stack;
        for (auto const& rule : nonTerminals_[i].rules) {
            for (auto const& sym : rule.body) {
                if (sym.is_non_terminal() && !reach[i][sym.ref]) {
                    reach[i][sym.ref] = true;
                    stack.push_back(sym.ref);
                }
            }
        }
        while (!stack.empty()) {
            auto const j = stack.back();
            stack.pop_back();
            for (auto const& rule : nonTerminals_[j].rules) {
                for (auto const& sym : rule.body) {
                    if (sym.is_non_terminal() && !reach[i][sym.ref]) {
                        reach[i][sym.ref] = true;
                        stack.push_back(sym.ref);
                    }
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto& nt = nonTerminals_[i];
        for (auto& rule : nt.rules) {
            rule.recursive = std::any_of(rule.body.begin(), rule.body.end(), [&](Symbol const& s) {
                return s.is_non_terminal() && (s.ref == i || reach[s.ref][i]);
            });
        }
    }

    // Minimal heights by fixed-point relaxation.
    std::vector<std::size_t> height(n, kUnbounded);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& rule : nonTerminals_[i].rules) {
                std::size_t deepest = 1;
                for (auto const& sym : rule.body) {
                    auto const h = sym.is_terminal() ? 1 : height[sym.ref];
                    deepest = std::max(deepest, h);
                }
                rule.min_height = deepest == kUnbounded ? kUnbounded : deepest + 1;
                if (rule.min_height < height[i]) {
                    height[i] = rule.min_height;
                    changed = true;
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (height[i] == kUnbounded) {
            throw GrammarError("<" + nonTerminals_[i].name + "> cannot derive a terminal string");
        }
        nonTerminals_[i].min_height = height[i];
    }
}

std::optional<std::size_t> Grammar::find(std::string_view name) const
{
    for (std::size_t i = 0; i < nonTerminals_.size(); ++i) {
        if (nonTerminals_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Grammar::index_of(std::string_view name) const
{
    if (auto i = find(name)) {
        return *i;
    }
    throw GrammarError("unknown non-terminal <" + std::string(name) + ">");
}

std::size_t Grammar::rule_count() const
{
    return std::accumulate(nonTerminals_.begin(), nonTerminals_.end(), std::size_t{0},
                           [](std::size_t acc, NonTerminal const& nt) { return acc + nt.rules.size(); });
}

std::vector<std::vector<double>> Grammar::probabilities() const
{
    std::vector<std::vector<double>> out;
    out.reserve(nonTerminals_.size());
    for (auto const& nt : nonTerminals_) {
        auto& row = out.emplace_back();
        for (auto const& rule : nt.rules) {
            row.push_back(rule.probability);
        }
    }
    return out;
}

Grammar Grammar::with_probabilities(const std::vector<std::vector<double>>& probabilities) const
{
    if (probabilities.size() != nonTerminals_.size()) {
        throw GrammarError("probability table has the wrong number of non-terminals");
    }
    Grammar copy = *this;
    for (std::size_t i = 0; i < nonTerminals_.size(); ++i) {
        auto& rules = copy.nonTerminals_[i].rules;
        if (probabilities[i].size() != rules.size()) {
            throw GrammarError("probability table row for <" + nonTerminals_[i].name + "> has the wrong length");
        }
        for (std::size_t r = 0; r < rules.size(); ++r) {
            auto const p = probabilities[i][r];
            if (!(p >= 0.0 && p <= 1.0)) {
                throw GrammarError("probability outside [0,1] for <" + nonTerminals_[i].name + ">");
            }
            rules[r].probability = p;
        }
    }
    return copy;
}

Grammar Grammar::with_uniform_probabilities() const
{
    Grammar copy = *this;
    for (auto& nt : copy.nonTerminals_) {
        for (auto& rule : nt.rules) {
            rule.probability = 1.0 / static_cast<double>(nt.rules.size());
        }
    }
    return copy;
}

std::vector<RawNonTerminal> Grammar::raw() const
{
    std::vector<RawNonTerminal> out;
    out.reserve(nonTerminals_.size());
    for (auto const& nt : nonTerminals_) {
        RawNonTerminal r;
        r.name = nt.name;
        for (auto const& rule : nt.rules) {
            r.alternatives.push_back(rule.body);
            r.probabilities.push_back(rule.probability);
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Located {
    char c;
    std::size_t line;
    std::size_t column;
};

struct Declaration {
    std::string name;
    std::size_t line;
    std::vector<Located> body;
};

std::string_view trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Tries to read `<name>` at position i; returns the end position or npos.
std::size_t match_non_terminal(std::vector<Located> const& s, std::size_t i, std::size_t end)
{
    if (s[i].c != '<') {
        return std::string::npos;
    }
    std::size_t j = i + 1;
    while (j < end && is_name_char(s[j].c)) {
        ++j;
    }
    if (j == i + 1 || j >= end || s[j].c != '>') {
        return std::string::npos;
    }
    return j + 1;
}

struct Token {
    Symbol symbol;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> tokenize(std::vector<Located> const& s, std::size_t begin, std::size_t end)
{
    std::vector<Token> tokens;
    std::size_t i = begin;
    while (i < end) {
        if (is_space(s[i].c)) {
            ++i;
            continue;
        }
        if (auto stop = match_non_terminal(s, i, end); stop != std::string::npos) {
            std::string name;
            for (auto k = i + 1; k + 1 < stop; ++k) {
                name.push_back(s[k].c);
            }
            tokens.push_back({{SymbolKind::NonTerminal, std::move(name), 0}, s[i].line, s[i].column});
            i = stop;
            continue;
        }
        // Terminal: up to whitespace or the start of a non-terminal.
        auto const start = i;
        std::string text;
        while (i < end && !is_space(s[i].c) && match_non_terminal(s, i, end) == std::string::npos) {
            text.push_back(s[i].c);
            ++i;
        }
        tokens.push_back({{SymbolKind::Terminal, std::move(text), 0}, s[start].line, s[start].column});
    }
    return tokens;
}

std::vector<std::vector<Symbol>> expand_variables(std::vector<Symbol> alternative, std::size_t dimensions)
{
    bool const hasMacro = std::any_of(alternative.begin(), alternative.end(),
                                      [](Symbol const& s) { return s.is_terminal() && s.text == "x[n]"; });
    if (!hasMacro) {
        return {std::move(alternative)};
    }
    std::vector<std::vector<Symbol>> out;
    for (std::size_t d = 0; d < dimensions; ++d) {
        auto copy = alternative;
        for (auto& s : copy) {
            if (s.is_terminal() && s.text == "x[n]") {
                s.text = "x[" + std::to_string(d) + "]";
            }
        }
        out.push_back(std::move(copy));
    }
    return out;
}

} // namespace

Grammar parse_bnf(std::string_view text, std::size_t dimensions)
{
    if (dimensions == 0) {
        throw GrammarError("dataset dimensionality must be at least 1");
    }
    std::vector<Declaration> decls;
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto const line = text.substr(pos, nl - pos);
        ++lineNo;
        pos = nl + 1;

        auto const trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        std::size_t bodyStart = 0;
        if (auto def = line.find("::="); def != std::string_view::npos) {
            auto const lhs = trim(line.substr(0, def));
            auto const lhsCol = line.find_first_not_of(" \t") + 1;
            if (lhs.size() < 3 || lhs.front() != '<' || lhs.back() != '>') {
                throw GrammarError("expected <name> before '::='", lineNo, lhsCol);
            }
            auto const name = lhs.substr(1, lhs.size() - 2);
            if (!std::all_of(name.begin(), name.end(), is_name_char)) {
                throw GrammarError("invalid non-terminal name '" + std::string(name) + "'", lineNo, lhsCol);
            }
            for (auto const& d : decls) {
                if (d.name == name) {
                    throw GrammarError("duplicate declaration of <" + std::string(name) + ">", lineNo, lhsCol);
                }
            }
            decls.push_back({std::string(name), lineNo, {}});
            bodyStart = def + 3;
        } else if (decls.empty()) {
            throw GrammarError("expected a '<name> ::=' declaration", lineNo, line.find_first_not_of(" \t") + 1);
        } else {
            decls.back().body.push_back({' ', lineNo, 0});
        }
        for (auto i = bodyStart; i < line.size(); ++i) {
            decls.back().body.push_back({line[i], lineNo, i + 1});
        }
    }
    if (decls.empty()) {
        throw GrammarError("grammar text contains no declarations");
    }

    std::vector<RawNonTerminal> raw;
    for (auto const& decl : decls) {
        RawNonTerminal nt;
        nt.name = decl.name;
        auto const& body = decl.body;
        std::size_t altBegin = 0;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            if (i < body.size() && body[i].c != '|') {
                continue;
            }
            auto tokens = tokenize(body, altBegin, i);
            if (tokens.empty()) {
                auto const line = i < body.size() ? body[i].line : decl.line;
                auto const col = i < body.size() ? body[i].column : 0;
                throw GrammarError("empty alternative in <" + decl.name + ">", line, col);
            }
            std::vector<Symbol> alternative;
            for (auto& tok : tokens) {
                if (tok.symbol.is_non_terminal()) {
                    auto known = std::any_of(decls.begin(), decls.end(),
                                             [&](Declaration const& d) { return d.name == tok.symbol.text; });
                    if (!known) {
                        throw GrammarError("undeclared non-terminal <" + tok.symbol.text + ">", tok.line, tok.column);
                    }
                }
                alternative.push_back(std::move(tok.symbol));
            }
            for (auto& alt : expand_variables(std::move(alternative), dimensions)) {
                nt.alternatives.push_back(std::move(alt));
            }
            altBegin = i + 1;
        }
        raw.push_back(std::move(nt));
    }

    try {
        return Grammar(std::move(raw));
    } catch (GrammarError const& e) {
        if (e.line() != 0) {
            throw;
        }
        // Attach the declaration line of the offending non-terminal when possible.
        for (auto const& decl : decls) {
            if (std::string(e.what()).find("<" + decl.name + ">") != std::string::npos) {
                throw GrammarError(e.what(), decl.line, 1);
            }
        }
        throw;
    }
}

Grammar load_bnf(const std::string& path, std::size_t dimensions)
{
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open grammar file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_bnf(buffer.str(), dimensions);
}

std::string render(const Grammar& grammar)
{
    std::string out;
    for (auto const& nt : grammar.non_terminals()) {
        out += "<" + nt.name + "> ::=";
        for (std::size_t r = 0; r < nt.rules.size(); ++r) {
            if (r > 0) {
                out += " |";
            }
            for (auto const& sym : nt.rules[r].body) {
                out += ' ';
                out += sym.is_non_terminal() ? "<" + sym.text + ">" : sym.text;
            }
        }
        out += '\n';
    }
    return out;
}

bool normalize_check(const Grammar& grammar)
{
    for (auto const& nt : grammar.non_terminals()) {
        double sum = 0.0;
        for (auto const& rule : nt.rules) {
            sum += rule.probability;
        }
        if (!(std::abs(sum - 1.0) <= 1e-9)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Rule selection

std::size_t select_rule(const NonTerminal& nonTerminal, std::span<const std::size_t> candidates, double codon)
{
    if (candidates.empty()) {
        throw GrammarError("<" + nonTerminal.name + "> has no candidate rules");
    }
    if (!(codon >= 0.0 && codon < 1.0)) {
        throw std::invalid_argument("codon must lie in [0,1)");
    }
    double total = 0.0;
    for (auto r : candidates) {
        total += nonTerminal.rules.at(r).probability;
    }
    bool const uniform = !(total > 0.0);
    double cumulative = 0.0;
    std::size_t lastPositive = candidates.back();
    for (auto r : candidates) {
        double const w = uniform ? 1.0 / static_cast<double>(candidates.size())
                                 : nonTerminal.rules[r].probability / total;
        if (w > 0.0) {
            lastPositive = r;
        }
        cumulative += w;
        if (codon < cumulative) {
            return r;
        }
    }
    // Rounding left the cumulative sum just under 1.
    return lastPositive;
}

std::size_t rule_for_codon(const Grammar& grammar, std::size_t nonTerminal, double codon, bool allowRecursive)
{
    if (nonTerminal >= grammar.size()) {
        throw GrammarError("unknown non-terminal index " + std::to_string(nonTerminal));
    }
    auto const& nt = grammar[nonTerminal];
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < nt.rules.size(); ++r) {
        if (allowRecursive || !nt.rules[r].recursive) {
            candidates.push_back(r);
        }
    }
    return select_rule(nt, candidates, codon);
}

std::size_t rule_for_codon(const Grammar& grammar, std::string_view nonTerminal, double codon, bool allowRecursive)
{
    return rule_for_codon(grammar, grammar.index_of(nonTerminal), codon, allowRecursive);
}

std::vector<std::size_t> depth_candidates(const NonTerminal& nonTerminal, std::size_t level, std::size_t maxDepth)
{
    std::vector<std::size_t> fits;
    for (std::size_t r = 0; r < nonTerminal.rules.size(); ++r) {
        if (level + nonTerminal.rules[r].min_height - 1 <= maxDepth) {
            fits.push_back(r);
        }
    }
    if (fits.empty()) {
        for (std::size_t r = 0; r < nonTerminal.rules.size(); ++r) {
            if (nonTerminal.rules[r].min_height == nonTerminal.min_height) {
                fits.push_back(r);
            }
        }
    }
    return fits;
}

} // namespace gramevo
