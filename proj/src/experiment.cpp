#include "gramevo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace gramevo {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string const& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

fs::path resolve(std::string const& value, fs::path const& baseDir)
{
    fs::path p(value);
    return p.is_absolute() ? p : (baseDir / p).lexically_normal();
}

template <typename T>
T parse_number(std::string const& key, std::string const& value)
{
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("invalid value '" + value + "' for " + key);
    }
    return out;
}

bool parse_bool(std::string const& key, std::string const& value)
{
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

std::string read_file(fs::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

std::string format_double(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n\r") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

BenchmarkSpec BenchmarkSpec::parse(const std::string& text, const fs::path& baseDir)
{
    BenchmarkSpec b;
    if (text == "quartic") {
        b.kind = Kind::Quartic;
    } else if (text == "pagie") {
        b.kind = Kind::Pagie;
    } else if (text.rfind("csv:", 0) == 0) {
        auto const rest = text.substr(4);
        auto const colon = rest.find_last_of(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
            throw ConfigError("benchmark must be csv:<path>:<targetColumn>");
        }
        b.kind = Kind::Csv;
        b.csvPath = resolve(rest.substr(0, colon), baseDir);
        b.targetColumn = rest.substr(colon + 1);
    } else {
        throw ConfigError("unknown benchmark '" + text + "' (expected quartic, pagie or csv:<path>:<target>)");
    }
    return b;
}

std::string BenchmarkSpec::to_string() const
{
    switch (kind) {
    case Kind::Quartic: return "quartic";
    case Kind::Pagie: return "pagie";
    default: return "csv:" + csvPath.string() + ":" + targetColumn;
    }
}

ExperimentSpec ExperimentSpec::parse(const std::string& text, const fs::path& baseDir)
{
    ExperimentSpec spec;
    auto& c = spec.config;
    std::map<std::string, std::function<void(std::string const&, std::string const&)>> const setters{
        {"grammar", [&](auto const&, auto const& v) { spec.grammarPath = resolve(v, baseDir); }},
        {"grouping", [&](auto const&, auto const& v) { spec.groupingSpecPath = resolve(v, baseDir); }},
        {"benchmark", [&](auto const&, auto const& v) { spec.benchmark = BenchmarkSpec::parse(v, baseDir); }},
        {"runs", [&](auto const& k, auto const& v) { spec.runs = parse_number<std::size_t>(k, v); }},
        {"base_seed", [&](auto const& k, auto const& v) { spec.baseSeed = parse_number<std::uint64_t>(k, v); }},
        {"output_dir", [&](auto const&, auto const& v) { spec.outputDir = resolve(v, baseDir); }},
        {"train_fraction", [&](auto const& k, auto const& v) { spec.trainFraction = parse_number<double>(k, v); }},
        {"population_size", [&](auto const& k, auto const& v) { c.populationSize = parse_number<std::size_t>(k, v); }},
        {"generations", [&](auto const& k, auto const& v) { c.generations = parse_number<std::size_t>(k, v); }},
        {"tournament_size", [&](auto const& k, auto const& v) { c.tournamentSize = parse_number<std::size_t>(k, v); }},
        {"elite_size", [&](auto const& k, auto const& v) { c.eliteSize = parse_number<std::size_t>(k, v); }},
        {"crossover_probability", [&](auto const& k, auto const& v) { c.crossoverProbability = parse_number<double>(k, v); }},
        {"starting_mutation_probability",
         [&](auto const& k, auto const& v) { c.startingMutationProbability = parse_number<double>(k, v); }},
        {"sigma", [&](auto const& k, auto const& v) { c.sigma = parse_number<double>(k, v); }},
        {"learning_factor", [&](auto const& k, auto const& v) { c.learningFactor = parse_number<double>(k, v); }},
        {"max_depth", [&](auto const& k, auto const& v) { c.maxDepth = parse_number<std::size_t>(k, v); }},
        {"worst_fitness", [&](auto const& k, auto const& v) { c.worstFitness = parse_number<double>(k, v); }},
        {"adaptive_pcfg", [&](auto const& k, auto const& v) { c.adaptivePcfg = parse_bool(k, v); }},
        {"adaptive_mutation", [&](auto const& k, auto const& v) { c.adaptiveMutation = parse_bool(k, v); }},
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineNo = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++lineNo;
        auto const t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        auto const eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineNo) + ": expected key = value");
        }
        auto const key = trim(t.substr(0, eq));
        auto const value = trim(t.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("line " + std::to_string(lineNo) + ": unknown key '" + key + "'");
        }
        if (auto [pos, fresh] = seen.emplace(key, lineNo); !fresh) {
            throw ConfigError("line " + std::to_string(lineNo) + ": key '" + key + "' already set on line " +
                              std::to_string(pos->second));
        }
        it->second(key, value);
    }

    if (spec.grammarPath.empty()) throw ConfigError("missing required key 'grammar'");
    if (spec.outputDir.empty()) throw ConfigError("missing required key 'output_dir'");
    if (spec.runs < 1) throw ConfigError("runs must be at least 1");
    if (!(spec.trainFraction >= 0.0 && spec.trainFraction <= 1.0)) throw ConfigError("train_fraction must lie in [0,1]");
    try {
        spec.config.validate();
    } catch (std::invalid_argument const& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

ExperimentSpec ExperimentSpec::load(const fs::path& path)
{
    auto const text = read_file(path);
    auto spec = parse(text, path.parent_path().empty() ? fs::path(".") : path.parent_path());
    if (!fs::exists(spec.grammarPath)) {
        throw IoError("grammar file not found: " + spec.grammarPath.string());
    }
    if (spec.groupingSpecPath && !fs::exists(*spec.groupingSpecPath)) {
        throw IoError("grouping spec not found: " + spec.groupingSpecPath->string());
    }
    if (spec.benchmark.kind == BenchmarkSpec::Kind::Csv && !fs::exists(spec.benchmark.csvPath)) {
        throw IoError("dataset not found: " + spec.benchmark.csvPath.string());
    }
    return spec;
}

std::string ExperimentSpec::echo() const
{
    auto const& c = config;
    std::ostringstream out;
    out << "grammar = " << grammarPath.string() << '\n';
    if (groupingSpecPath) {
        out << "grouping = " << groupingSpecPath->string() << '\n';
    }
    out << "benchmark = " << benchmark.to_string() << '\n'
        << "runs = " << runs << '\n'
        << "base_seed = " << baseSeed << '\n'
        << "output_dir = " << outputDir.string() << '\n'
        << "train_fraction = " << format_double(trainFraction) << '\n'
        << "population_size = " << c.populationSize << '\n'
        << "generations = " << c.generations << '\n'
        << "tournament_size = " << c.tournamentSize << '\n'
        << "elite_size = " << c.eliteSize << '\n'
        << "crossover_probability = " << format_double(c.crossoverProbability) << '\n'
        << "starting_mutation_probability = " << format_double(c.startingMutationProbability) << '\n'
        << "sigma = " << format_double(c.sigma) << '\n'
        << "learning_factor = " << format_double(c.learningFactor) << '\n'
        << "max_depth = " << c.maxDepth << '\n'
        << "worst_fitness = " << format_double(c.worstFitness) << '\n'
        << "adaptive_pcfg = " << (c.adaptivePcfg ? "true" : "false") << '\n'
        << "adaptive_mutation = " << (c.adaptiveMutation ? "true" : "false") << '\n';
    return out.str();
}

void write_run_csv(std::ostream& out, const RunLog& log, std::uint64_t seed)
{
    out << "# seed=" << seed << '\n';
    out << "generation,best_fitness_train,best_fitness_test,mean_fitness,best_phenotype";
    for (auto const& nt : log.nonTerminals) {
        out << ',' << csv_field("mut_" + nt);
    }
    for (std::size_t nt = 0; nt < log.nonTerminals.size(); ++nt) {
        for (std::size_t r = 0; r < log.rulesPerNonTerminal[nt]; ++r) {
            out << ',' << csv_field("p_" + log.nonTerminals[nt] + "_" + std::to_string(r));
        }
    }
    out << '\n';
    for (auto const& rec : log.generations) {
        out << rec.generation << ',' << format_double(rec.bestFitness) << ',' << format_double(rec.bestTestFitness) << ','
            << format_double(rec.meanFitness) << ',' << csv_field(rec.bestPhenotype);
        for (auto r : rec.meanMutationRate) {
            out << ',' << format_double(r);
        }
        for (auto const& row : rec.ruleProbabilities) {
            for (auto p : row) {
                out << ',' << format_double(p);
            }
        }
        out << '\n';
    }
}

Dataset load_benchmark(const ExperimentSpec& spec)
{
    switch (spec.benchmark.kind) {
    case BenchmarkSpec::Kind::Quartic: return make_quartic();
    case BenchmarkSpec::Kind::Pagie: return make_pagie();
    default:
        try {
            return load_csv(spec.benchmark.csvPath.string(), spec.benchmark.targetColumn, spec.trainFraction,
                            spec.baseSeed);
        } catch (std::ios_base::failure const& e) {
            throw IoError(e.what());
        } catch (std::runtime_error const& e) {
            throw IoError(e.what());
        }
    }
}

Grammar load_experiment_grammar(const ExperimentSpec& spec, std::size_t dimensions)
{
    auto grammar = parse_bnf(read_file(spec.grammarPath), dimensions);
    if (spec.groupingSpecPath) {
        grammar = apply_function_grouping(grammar, parse_grouping_spec(read_file(*spec.groupingSpecPath)));
    }
    for (auto const& nt : grammar.non_terminals()) {
        for (auto const& rule : nt.rules) {
            for (auto const& sym : rule.body) {
                if (sym.is_terminal() && sym.text.rfind("x[", 0) == 0 && sym.text.back() == ']') {
                    std::size_t index = 0;
                    auto const digits = sym.text.substr(2, sym.text.size() - 3);
                    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
                    if (ec == std::errc{} && ptr == digits.data() + digits.size() && index >= dimensions) {
                        throw ConfigError("grammar uses " + sym.text + " but the dataset has " +
                                          std::to_string(dimensions) + " input column(s)");
                    }
                }
            }
        }
    }
    return grammar;
}

EvolutionResult run_single(const EvolutionConfig& config, const Grammar& grammar, const Dataset& data)
{
    auto const fitnessOn = [&data](std::vector<std::size_t> const& rows) {
        return [&data, &rows](DerivationResult const& d) {
            if (!d.tree) {
                return std::numeric_limits<double>::infinity();
            }
            return rmse_on(*d.tree, data, rows);
        };
    };
    FitnessFunction const train = fitnessOn(data.train_rows());
    FitnessFunction const test = fitnessOn(data.test_rows());
    return evolve(config, grammar, train, test);
}

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec, std::size_t threads)
{
    auto const data = load_benchmark(spec);
    auto const grammar = load_experiment_grammar(spec, data.dimensions());

    std::error_code ec;
    fs::create_directories(spec.outputDir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + spec.outputDir.string() + ": " + ec.message());
    }

    std::vector<RunSummary> summaries(spec.runs);
    std::atomic<std::size_t> nextRun{0};
    std::mutex errorMutex;
    std::exception_ptr firstError;

    auto worker = [&]() {
        for (auto r = nextRun++; r < spec.runs; r = nextRun++) {
            try {
                auto config = spec.config;
                config.seed = spec.baseSeed + r;
                auto const result = run_single(config, grammar, data);
                auto const path = spec.outputDir / ("run_" + std::to_string(config.seed) + ".csv");
                std::ofstream out(path, std::ios::binary);
                if (!out) {
                    throw IoError("cannot write " + path.string());
                }
                write_run_csv(out, result.log, config.seed);
                if (!out) {
                    throw IoError("failed writing " + path.string());
                }
                auto const& last = result.log.generations.back();
                summaries[r] = {r, config.seed, last.bestFitness, last.bestTestFitness, last.bestPhenotype};
            } catch (...) {
                std::lock_guard lock(errorMutex);
                if (!firstError) {
                    firstError = std::current_exception();
                }
            }
        }
    };

    auto const workers = std::max<std::size_t>(1, std::min(threads == 0 ? spec.runs : threads, spec.runs));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }
    if (firstError) {
        std::rethrow_exception(firstError);
    }

    std::ofstream summary(spec.outputDir / "summary.csv", std::ios::binary);
    std::ofstream echo(spec.outputDir / "spec_echo.txt", std::ios::binary);
    if (!summary || !echo) {
        throw IoError("cannot write summary files in " + spec.outputDir.string());
    }
    summary << "run,seed,best_fitness_train,best_fitness_test,best_phenotype\n";
    for (auto const& s : summaries) {
        summary << s.run << ',' << s.seed << ',' << format_double(s.bestTrain) << ',' << format_double(s.bestTest) << ','
                << csv_field(s.bestPhenotype) << '\n';
    }
    echo << spec.echo();
    if (!summary || !echo) {
        throw IoError("failed writing summary files in " + spec.outputDir.string());
    }
    return summaries;
}

std::vector<double> read_summary(const fs::path& dir)
{
    auto const path = dir / "summary.csv";
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path.string() + " is empty");
    }
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) {
            header.push_back(trim(cell));
        }
    }
    auto const col = std::find(header.begin(), header.end(), "best_fitness_train");
    if (col == header.end()) {
        throw IoError(path.string() + " has no best_fitness_train column");
    }
    auto const index = static_cast<std::size_t>(col - header.begin());
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        for (std::size_t c = 0; c <= index && std::getline(row, cell, ','); ++c) {
        }
        double v = 0.0;
        auto const t = trim(cell);
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{}) {
            throw IoError(path.string() + ": invalid fitness '" + t + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw IoError(path.string() + " has no runs");
    }
    return values;
}

ComparisonResult compare_dirs(const fs::path& dirA, const fs::path& dirB)
{
    auto const a = read_summary(dirA);
    auto const b = read_summary(dirB);
    return mann_whitney_u(a, b);
}

} // namespace gramevo
