#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gramevo/dataset.hpp"
#include "gramevo/evolution.hpp"
#include "gramevo/experiment.hpp"
#include "gramevo/grammar.hpp"
#include "gramevo/mapping.hpp"
#include "gramevo/stats.hpp"

namespace py = pybind11;
using namespace gramevo;

namespace {

py::dict derivation_dict(const Grammar& grammar, const MappingResult& m)
{
    py::dict d;
    d["phenotype"] = m.derivation.phenotype;
    d["depth"] = m.derivation.depth;
    d["expression"] = m.derivation.tree ? py::cast(render_tree(*m.derivation.tree)) : py::none();
    d["genotype"] = m.genotype.to_named(grammar);
    return d;
}

py::dict log_dict(const RunLog& log)
{
    py::list generations;
    for (auto const& g : log.generations) {
        py::dict row;
        row["generation"] = g.generation;
        row["best_fitness_train"] = g.bestFitness;
        row["best_fitness_test"] = g.bestTestFitness;
        row["mean_fitness"] = g.meanFitness;
        row["best_phenotype"] = g.bestPhenotype;
        row["mean_mutation_rate"] = g.meanMutationRate;
        row["rule_probabilities"] = g.ruleProbabilities;
        generations.append(row);
    }
    py::dict out;
    out["non_terminals"] = log.nonTerminals;
    out["generations"] = generations;
    return out;
}

Dataset benchmark_by_name(const std::string& name)
{
    if (name == "quartic") return make_quartic();
    if (name == "pagie") return make_pagie();
    throw py::value_error("benchmark must be 'quartic' or 'pagie'");
}

} // namespace

PYBIND11_MODULE(gramevo, m)
{
    m.doc() = "Structured grammatical evolution with per-non-terminal adaptive mutation";

    py::register_exception<GrammarError>(m, "GrammarError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<Grammar>(m, "Grammar")
        .def_property_readonly("start_symbol", &Grammar::start_symbol)
        .def_property_readonly("non_terminals",
                               [](const Grammar& g) {
                                   std::vector<std::string> names;
                                   for (auto const& nt : g.non_terminals()) names.push_back(nt.name);
                                   return names;
                               })
        .def_property_readonly("rule_count", &Grammar::rule_count)
        .def("probabilities", &Grammar::probabilities)
        .def("with_probabilities", &Grammar::with_probabilities, py::arg("probabilities"))
        .def("recursive",
             [](const Grammar& g, const std::string& name) {
                 std::vector<bool> flags;
                 for (auto const& rule : g[g.index_of(name)].rules) flags.push_back(rule.recursive);
                 return flags;
             })
        .def("__len__", &Grammar::size)
        .def("__str__", [](const Grammar& g) { return render(g); })
        .def("__eq__", [](const Grammar& a, const Grammar& b) { return a == b; });

    m.def("parse_bnf", &parse_bnf, py::arg("text"), py::arg("dimensions") = 1);
    m.def("load_bnf", &load_bnf, py::arg("path"), py::arg("dimensions") = 1);
    m.def("normalize_check", &normalize_check);
    m.def(
        "rule_for_codon",
        [](const Grammar& g, const std::string& nt, double codon, bool allowRecursive) {
            return rule_for_codon(g, nt, codon, allowRecursive);
        },
        py::arg("grammar"), py::arg("non_terminal"), py::arg("codon"), py::arg("allow_recursive") = true);
    m.def(
        "apply_function_grouping",
        [](const Grammar& g, const std::string& spec) { return apply_function_grouping(g, parse_grouping_spec(spec)); },
        py::arg("grammar"), py::arg("spec"), "Apply `split <source> -> <new>: i,j` lines to a grammar.");
    m.def("enumerate_language", &enumerate_language, py::arg("grammar"), py::arg("max_depth"),
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "map_genotype",
        [](const Grammar& g, const std::map<std::string, std::vector<double>>& genotype, std::size_t maxDepth,
           std::uint64_t seed) {
            Rng rng(derive_seed(seed, 0, 0, StreamPurpose::Mapping));
            return derivation_dict(g, map_genotype(Genotype::from_named(g, genotype), g, maxDepth, rng));
        },
        py::arg("grammar"), py::arg("genotype"), py::arg("max_depth"), py::arg("seed") = 0,
        "Map named codon lists; missing codons are drawn from `seed`.");

    py::class_<EvolutionConfig>(m, "EvolutionConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &EvolutionConfig::populationSize)
        .def_readwrite("generations", &EvolutionConfig::generations)
        .def_readwrite("tournament_size", &EvolutionConfig::tournamentSize)
        .def_readwrite("elite_size", &EvolutionConfig::eliteSize)
        .def_readwrite("crossover_probability", &EvolutionConfig::crossoverProbability)
        .def_readwrite("starting_mutation_probability", &EvolutionConfig::startingMutationProbability)
        .def_readwrite("sigma", &EvolutionConfig::sigma)
        .def_readwrite("learning_factor", &EvolutionConfig::learningFactor)
        .def_readwrite("max_depth", &EvolutionConfig::maxDepth)
        .def_readwrite("seed", &EvolutionConfig::seed)
        .def_readwrite("worst_fitness", &EvolutionConfig::worstFitness)
        .def_readwrite("adaptive_pcfg", &EvolutionConfig::adaptivePcfg)
        .def_readwrite("adaptive_mutation", &EvolutionConfig::adaptiveMutation)
        .def("validate", &EvolutionConfig::validate);

    m.def(
        "evolve",
        [](const EvolutionConfig& config, const Grammar& grammar, const std::string& benchmark) {
            auto const data = benchmark_by_name(benchmark);
            EvolutionResult result = [&] {
                py::gil_scoped_release release;
                return run_single(config, grammar, data);
            }();
            auto out = log_dict(result.log);
            out["best_phenotype"] = result.best.derivation->phenotype;
            out["best_fitness"] = *result.best.fitness;
            out["final_grammar"] = result.finalGrammar;
            return out;
        },
        py::arg("config"), py::arg("grammar"), py::arg("benchmark") = "quartic",
        "Run one seeded evolution on a built-in benchmark ('quartic' or 'pagie').");

    m.def(
        "run_experiment",
        [](const std::string& specPath, std::size_t threads) {
            auto const spec = ExperimentSpec::load(specPath);
            py::gil_scoped_release release;
            auto const summaries = run_experiment(spec, threads);
            std::vector<double> best;
            for (auto const& s : summaries) best.push_back(s.bestTrain);
            return best;
        },
        py::arg("spec_path"), py::arg("threads") = 0, "Run a spec file; returns each run's best train fitness.");

    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            auto const r = mann_whitney_u(a, b);
            py::dict d;
            d["u"] = r.uStatistic;
            d["p_value"] = r.pValueTwoSided;
            d["exact"] = r.exact;
            d["median_a"] = r.medianA;
            d["median_b"] = r.medianB;
            return d;
        },
        py::arg("a"), py::arg("b"));
}
