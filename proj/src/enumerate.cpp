#include "gramevo/grammar.hpp"

#include <map>
#include <utility>

namespace gramevo {

namespace {

class LanguageEnumerator {
public:
    LanguageEnumerator(Grammar const& grammar, std::size_t maxDepth) : grammar_(grammar), maxDepth_(maxDepth) {}

    std::set<std::string> const& expand(std::size_t nt, std::size_t level)
    {
        auto const key = std::make_pair(nt, level);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        std::set<std::string> result;
        auto const& nonTerminal = grammar_[nt];
        for (auto r : depth_candidates(nonTerminal, level, maxDepth_)) {
            std::set<std::string> partial{std::string{}};
            for (auto const& sym : nonTerminal.rules[r].body) {
                std::set<std::string> next;
                if (sym.is_terminal()) {
                    for (auto const& prefix : partial) {
                        next.insert(prefix.empty() ? sym.text : prefix + " " + sym.text);
                    }
                } else {
                    auto const& tails = expand(sym.ref, level + 1);
                    for (auto const& prefix : partial) {
                        for (auto const& tail : tails) {
                            next.insert(prefix.empty() ? tail : prefix + " " + tail);
                        }
                    }
                }
                partial = std::move(next);
            }
            result.merge(partial);
        }
        return memo_.emplace(key, std::move(result)).first->second;
    }

private:
    Grammar const& grammar_;
    std::size_t maxDepth_;
    std::map<std::pair<std::size_t, std::size_t>, std::set<std::string>> memo_;
};

} // namespace

std::set<std::string> enumerate_language(const Grammar& grammar, std::size_t maxDepth)
{
    if (maxDepth < 1) {
        throw std::invalid_argument("maxDepth must be at least 1");
    }
    LanguageEnumerator enumerator(grammar, maxDepth);
    return enumerator.expand(grammar.start(), 1);
}

} // namespace gramevo
