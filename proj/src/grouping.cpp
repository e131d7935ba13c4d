#include "gramevo/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gramevo {

namespace {

std::string_view trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string strip_brackets(std::string_view s)
{
    s = trim(s);
    if (s.size() >= 2 && s.front() == '<' && s.back() == '>') {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

} // namespace

GroupingSpec parse_grouping_spec(std::string_view text)
{
    GroupingSpec spec;
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto const line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++lineNo;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (line.substr(0, 6) != "split ") {
            throw GrammarError("expected 'split <source> -> <newName>: indices'", lineNo, 1);
        }
        auto const arrow = line.find("->");
        auto const colon = line.find(':', arrow == std::string_view::npos ? 0 : arrow);
        if (arrow == std::string_view::npos || colon == std::string_view::npos) {
            throw GrammarError("malformed split line", lineNo, 1);
        }
        auto const source = strip_brackets(line.substr(6, arrow - 6));
        auto const newName = strip_brackets(line.substr(arrow + 2, colon - arrow - 2));
        if (source.empty() || newName.empty()) {
            throw GrammarError("split line needs a source and a new name", lineNo, 1);
        }

        GroupSplit group{newName, {}};
        auto indices = line.substr(colon + 1);
        std::size_t start = 0;
        while (start <= indices.size()) {
            auto comma = indices.find(',', start);
            if (comma == std::string_view::npos) {
                comma = indices.size();
            }
            auto const field = trim(indices.substr(start, comma - start));
            std::size_t value = 0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
                throw GrammarError("invalid rule index '" + std::string(field) + "'", lineNo,
                                   static_cast<std::size_t>(field.data() - line.data()) + 1);
            }
            group.ruleIndices.push_back(value);
            start = comma + 1;
        }

        auto it = std::find_if(spec.entries.begin(), spec.entries.end(),
                               [&](GroupingEntry const& e) { return e.source == source; });
        if (it == spec.entries.end()) {
            spec.entries.push_back({source, {std::move(group)}});
        } else {
            it->groups.push_back(std::move(group));
        }
    }
    return spec;
}

GroupingSpec load_grouping_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open grouping spec " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_grouping_spec(buffer.str());
}

Grammar apply_function_grouping(const Grammar& grammar, const GroupingSpec& spec)
{
    std::map<std::size_t, GroupingEntry const*> bySource;
    std::set<std::string> newNames;
    for (auto const& entry : spec.entries) {
        auto const source = grammar.find(entry.source);
        if (!source) {
            throw GrammarError("grouping source <" + entry.source + "> is not in the grammar");
        }
        if (!bySource.emplace(*source, &entry).second) {
            throw GrammarError("grouping source <" + entry.source + "> listed twice");
        }
        auto const ruleCount = grammar[*source].rules.size();
        std::set<std::size_t> used;
        for (auto const& group : entry.groups) {
            if (grammar.find(group.newName) || !newNames.insert(group.newName).second) {
                throw GrammarError("grouping name <" + group.newName + "> collides with an existing non-terminal");
            }
            if (group.ruleIndices.empty()) {
                throw GrammarError("group <" + group.newName + "> lists no rules");
            }
            for (auto r : group.ruleIndices) {
                if (r >= ruleCount) {
                    throw GrammarError("rule index " + std::to_string(r) + " out of range for <" + entry.source + ">");
                }
                if (!used.insert(r).second) {
                    throw GrammarError("rule index " + std::to_string(r) + " of <" + entry.source +
                                       "> assigned to more than one group");
                }
            }
        }
    }

    std::vector<RawNonTerminal> out;
    auto const raw = grammar.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto it = bySource.find(i);
        if (it == bySource.end()) {
            out.push_back({raw[i].name, raw[i].alternatives, {}});
            continue;
        }
        auto const& entry = *it->second;
        std::set<std::size_t> moved;
        for (auto const& group : entry.groups) {
            moved.insert(group.ruleIndices.begin(), group.ruleIndices.end());
        }
        RawNonTerminal source{raw[i].name, {}, {}};
        for (std::size_t r = 0; r < raw[i].alternatives.size(); ++r) {
            if (!moved.contains(r)) {
                source.alternatives.push_back(raw[i].alternatives[r]);
            }
        }
        std::vector<RawNonTerminal> fresh;
        for (auto const& group : entry.groups) {
            source.alternatives.push_back({Symbol{SymbolKind::NonTerminal, group.newName, 0}});
            RawNonTerminal nt{group.newName, {}, {}};
            for (auto r : group.ruleIndices) {
                nt.alternatives.push_back(raw[i].alternatives[r]);
            }
            fresh.push_back(std::move(nt));
        }
        out.push_back(std::move(source));
        for (auto& nt : fresh) {
            out.push_back(std::move(nt));
        }
    }
    return Grammar(std::move(out));
}

} // namespace gramevo
