#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gramevo/experiment.hpp"
#include "gramevo/grammar.hpp"

using namespace gramevo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

std::size_t thread_cap()
{
    if (auto const* env = std::getenv("GRAMEVO_THREADS")) {
        try {
            auto const n = std::stoul(env);
            return n;
        } catch (std::exception const&) {
            throw ConfigError(std::string("GRAMEVO_THREADS must be a non-negative integer, got '") + env + "'");
        }
    }
    return 0;
}

void print_report(Grammar const& grammar)
{
    std::cout << "start: <" << grammar.start_symbol() << ">\n";
    std::cout << "non-terminals: " << grammar.size() << ", rules: " << grammar.rule_count() << "\n";
    for (auto const& nt : grammar.non_terminals()) {
        std::cout << "<" << nt.name << ">  min_height=" << nt.min_height << "\n";
        for (std::size_t r = 0; r < nt.rules.size(); ++r) {
            auto const& rule = nt.rules[r];
            std::cout << "  [" << r << "] p=" << format_double(rule.probability)
                      << (rule.recursive ? " recursive    " : " non-recursive") << " :";
            for (auto const& sym : rule.body) {
                std::cout << ' ' << (sym.is_non_terminal() ? "<" + sym.text + ">" : sym.text);
            }
            std::cout << "\n";
        }
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grammar-based genetic programming with adaptive facilitated mutation"};
    app.require_subcommand(1);

    std::string specPath;
    auto* run = app.add_subcommand("run", "Run a seeded batch of experiments");
    run->add_option("--spec", specPath, "Experiment spec file (key = value)")->required();

    auto* grammarCmd = app.add_subcommand("grammar", "Inspect and transform grammars");
    grammarCmd->require_subcommand(1);

    std::string grammarFile;
    std::size_t dims = 1;
    auto* check = grammarCmd->add_subcommand("check", "Validate a grammar and print its structure");
    check->add_option("grammar", grammarFile, "Grammar file")->required();
    check->add_option("--dims", dims, "Dataset dimensionality used to expand x[n]");

    std::string groupingFile;
    std::string outputFile;
    auto* transform = grammarCmd->add_subcommand("transform", "Apply a function grouping spec");
    transform->add_option("grammar", grammarFile, "Grammar file")->required();
    transform->add_option("grouping", groupingFile, "Grouping spec file")->required();
    transform->add_option("-o,--output", outputFile, "Output grammar file (stdout when omitted)");
    transform->add_option("--dims", dims, "Dataset dimensionality used to expand x[n]");

    std::size_t depth = 0;
    auto* enumerate = grammarCmd->add_subcommand("enumerate", "Print the bounded language, one phenotype per line");
    enumerate->add_option("grammar", grammarFile, "Grammar file")->required();
    enumerate->add_option("--depth", depth, "Maximum derivation depth")->required()->check(CLI::PositiveNumber);
    enumerate->add_option("--dims", dims, "Dataset dimensionality used to expand x[n]");

    std::string dirA;
    std::string dirB;
    auto* compare = app.add_subcommand("compare", "Mann-Whitney U test on two result directories");
    compare->add_option("dirA", dirA, "First result directory")->required();
    compare->add_option("dirB", dirB, "Second result directory")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        auto const code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            auto const spec = ExperimentSpec::load(specPath);
            auto const summaries = run_experiment(spec, thread_cap());
            for (auto const& s : summaries) {
                std::cout << "run " << s.run << " seed " << s.seed << " best_train " << format_double(s.bestTrain)
                          << " : " << s.bestPhenotype << "\n";
            }
        } else if (check->parsed()) {
            print_report(load_bnf(grammarFile, dims));
        } else if (transform->parsed()) {
            auto const grouped = apply_function_grouping(load_bnf(grammarFile, dims), load_grouping_spec(groupingFile));
            if (outputFile.empty()) {
                std::cout << render(grouped);
            } else {
                std::ofstream out(outputFile, std::ios::binary);
                out << render(grouped);
                if (!out) {
                    throw IoError("cannot write " + outputFile);
                }
            }
        } else if (enumerate->parsed()) {
            for (auto const& phenotype : enumerate_language(load_bnf(grammarFile, dims), depth)) {
                std::cout << phenotype << "\n";
            }
        } else if (compare->parsed()) {
            auto const r = compare_dirs(dirA, dirB);
            std::cout << "U = " << format_double(r.uStatistic) << "\n"
                      << "p_two_sided = " << format_double(r.pValueTwoSided) << "\n"
                      << "method = " << (r.exact ? "exact" : "normal approximation") << "\n"
                      << "median_a = " << format_double(r.medianA) << "\n"
                      << "median_b = " << format_double(r.medianB) << "\n"
                      << "n_a = " << r.nA << "\n"
                      << "n_b = " << r.nB << "\n";
        }
    } catch (IoError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (std::ios_base::failure const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
