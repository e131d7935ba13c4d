#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gramevo/experiment.hpp"
#include "unit/helpers.hpp"

using namespace gramevo;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const fs::path& path)
{
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
}

std::string tiny_spec(const fs::path& out, const std::string& extra = "")
{
    return "grammar = " + (testing::source_dir() / "grammars/standard.bnf").string() +
           "\nbenchmark = quartic\nruns = 3\nbase_seed = 100\npopulation_size = 20\ngenerations = 5\n"
           "max_depth = 7\noutput_dir = " +
           out.string() + "\n" + extra;
}

} // namespace

TEST_SUITE("experiment spec")
{
    TEST_CASE("parses keys and resolves relative paths")
    {
        auto const spec = ExperimentSpec::parse("# comment\ngrammar = g.bnf\ngrouping = x.groups\nbenchmark = pagie\n"
                                                "runs = 4\nbase_seed = 9\noutput_dir = out\nsigma = 0\n"
                                                "adaptive_pcfg = false\nmax_depth = 12\n",
                                                "/base");
        CHECK(spec.grammarPath == fs::path("/base/g.bnf"));
        CHECK(spec.groupingSpecPath == fs::path("/base/x.groups"));
        CHECK(spec.outputDir == fs::path("/base/out"));
        CHECK(spec.benchmark.kind == BenchmarkSpec::Kind::Pagie);
        CHECK(spec.runs == 4);
        CHECK(spec.baseSeed == 9);
        CHECK(spec.config.sigma == 0.0);
        CHECK_FALSE(spec.config.adaptivePcfg);
        CHECK(spec.config.adaptiveMutation);
        CHECK(spec.config.maxDepth == 12);
        CHECK(spec.config.populationSize == EvolutionConfig{}.populationSize);

        auto const csv = ExperimentSpec::parse("grammar = g\noutput_dir = o\nbenchmark = csv:data/d.csv:target\n", "/b");
        CHECK(csv.benchmark.kind == BenchmarkSpec::Kind::Csv);
        CHECK(csv.benchmark.csvPath == fs::path("/b/data/d.csv"));
        CHECK(csv.benchmark.targetColumn == "target");
    }

    TEST_CASE("echo reparses to the same spec")
    {
        auto const spec = ExperimentSpec::parse("grammar = /g.bnf\noutput_dir = /o\nsigma = 0.125\nbenchmark = pagie\n", "/");
        auto const again = ExperimentSpec::parse(spec.echo(), "/elsewhere");
        CHECK(again.echo() == spec.echo());
    }

    TEST_CASE("rejects bad specs")
    {
        auto bad = [](const std::string& text) { CHECK_THROWS_AS(ExperimentSpec::parse(text, "/"), ConfigError); };
        bad("grammar = g\noutput_dir = o\ncolour = red\n");
        bad("grammar = g\noutput_dir = o\nruns = 2\nruns = 3\n");
        bad("output_dir = o\n");
        bad("grammar = g\n");
        bad("grammar = g\noutput_dir = o\nruns = two\n");
        bad("grammar = g\noutput_dir = o\nruns = 0\n");
        bad("grammar = g\noutput_dir = o\nsigma = -1\n");
        bad("grammar = g\noutput_dir = o\nadaptive_pcfg = maybe\n");
        bad("grammar = g\noutput_dir = o\nbenchmark = keijzer\n");
        bad("grammar = g\noutput_dir = o\njust text\n");
        CHECK_THROWS_AS(ExperimentSpec::load("/nonexistent/spec.cfg"), IoError);
    }

    TEST_CASE("format_double round-trips")
    {
        CHECK(format_double(0.1) == "0.1");
        CHECK(format_double(1e10) == "1e+10");
        CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
        CHECK(csv_field("a,b") == "\"a,b\"");
        CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
        CHECK(csv_field("plain") == "plain");
    }
}

TEST_SUITE("experiment runs")
{
    TEST_CASE("writes one csv per run plus summary and echo")
    {
        auto const dir = testing::scratch_dir("runs");
        auto const spec = ExperimentSpec::parse(tiny_spec(dir / "a"), dir);
        auto const summaries = run_experiment(spec, 2);
        REQUIRE(summaries.size() == 3);
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(summaries[r].seed == 100 + r);
            auto const lines = lines_of(dir / "a" / ("run_" + std::to_string(100 + r) + ".csv"));
            REQUIRE(lines.size() == 2 + 5);
            CHECK(lines[0] == "# seed=" + std::to_string(100 + r));
            auto const header = split(lines[1]);
            // 5 fixed columns, one rate per non-terminal, one probability per rule.
            CHECK(header.size() == 5 + 5 + 14);
            CHECK(header[5] == "mut_start");
            CHECK(header.back() == "p_var_1");
            for (std::size_t i = 2; i < lines.size(); ++i) {
                CHECK(split(lines[i]).size() == header.size());
            }
        }
        auto const summary = lines_of(dir / "a" / "summary.csv");
        CHECK(summary.size() == 4);
        CHECK(summary[0] == "run,seed,best_fitness_train,best_fitness_test,best_phenotype");
        CHECK(read_summary(dir / "a").size() == 3);
        CHECK(ExperimentSpec::parse(testing::read_file(dir / "a" / "spec_echo.txt"), "/").echo() == spec.echo());
    }

    TEST_CASE("reruns are byte-identical regardless of thread count")
    {
        auto const dir = testing::scratch_dir("rerun");
        run_experiment(ExperimentSpec::parse(tiny_spec(dir / "a"), dir), 1);
        run_experiment(ExperimentSpec::parse(tiny_spec(dir / "b"), dir), 3);
        for (auto const* name : {"run_100.csv", "run_101.csv", "run_102.csv", "summary.csv"}) {
            CHECK(testing::read_file(dir / "a" / name) == testing::read_file(dir / "b" / name));
        }
    }

    TEST_CASE("sigma zero keeps the rate columns constant")
    {
        auto const dir = testing::scratch_dir("sigma0");
        run_experiment(ExperimentSpec::parse(tiny_spec(dir / "a", "sigma = 0\nstarting_mutation_probability = 0.2\n"), dir));
        auto const lines = lines_of(dir / "a" / "run_100.csv");
        for (std::size_t i = 2; i < lines.size(); ++i) {
            auto const cells = split(lines[i]);
            for (std::size_t c = 5; c < 10; ++c) CHECK(cells[c] == "0.2");
        }
    }

    TEST_CASE("grouping and csv benchmarks")
    {
        auto const dir = testing::scratch_dir("csvrun");
        {
            std::ofstream csv(dir / "data.csv");
            csv << "u,v,y\n";
            for (int i = 0; i < 30; ++i) csv << i * 0.1 << ',' << 1.0 - i * 0.05 << ',' << i * 0.1 * (1.0 - i * 0.05) << '\n';
        }
        auto const text = "grammar = " + (testing::source_dir() / "grammars/standard.bnf").string() +
                          "\ngrouping = " + (testing::source_dir() / "grammars/trig_pow.groups").string() +
                          "\nbenchmark = csv:data.csv:y\ntrain_fraction = 0.6\nruns = 1\npopulation_size = 10\n"
                          "generations = 3\nmax_depth = 7\noutput_dir = out\n";
        auto const spec = ExperimentSpec::parse(text, dir);
        auto const data = load_benchmark(spec);
        CHECK(data.train_rows().size() == 18);
        auto const grammar = load_experiment_grammar(spec, data.dimensions());
        CHECK(grammar.size() == 7);
        CHECK(grammar[grammar.index_of("var")].rules.size() == 3);
        auto const summaries = run_experiment(spec);
        REQUIRE(summaries.size() == 1);
        CHECK(std::isfinite(summaries[0].bestTest));
        auto const header = split(lines_of(dir / "out" / "run_0.csv")[1]);
        CHECK(header.size() == 5 + 7 + 1 + 3 + 4 + 2 + 2 + 2 + 3);
    }

    TEST_CASE("grammar variables must exist in the dataset")
    {
        auto const dir = testing::scratch_dir("dims");
        std::ofstream(dir / "g.bnf") << "<e> ::= x[0] | x[3]\n";
        auto const spec = ExperimentSpec::parse("grammar = g.bnf\noutput_dir = out\n", dir);
        CHECK_THROWS_AS(load_experiment_grammar(spec, 2), ConfigError);
        CHECK_NOTHROW(load_experiment_grammar(spec, 4));
    }

    TEST_CASE("compare directories")
    {
        auto const dir = testing::scratch_dir("compare");
        run_experiment(ExperimentSpec::parse(tiny_spec(dir / "a"), dir));
        auto const same = compare_dirs(dir / "a", dir / "a");
        CHECK(same.uStatistic == 4.5);
        CHECK(same.pValueTwoSided == 1.0);
        CHECK(same.exact);
        CHECK_THROWS_AS(compare_dirs(dir / "a", dir / "missing"), IoError);
    }
}
