#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gramevo/dataset.hpp"
#include "gramevo/evolution.hpp"
#include "gramevo/stats.hpp"

namespace gramevo {

/// Invalid experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system or dataset I/O failure (CLI exit code 2).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchmarkSpec {
    enum class Kind { Quartic, Pagie, Csv };
    Kind kind = Kind::Quartic;
    std::filesystem::path csvPath;
    std::string targetColumn;

    /// `quartic`, `pagie` or `csv:<path>:<targetColumn>`.
    static BenchmarkSpec parse(const std::string& text, const std::filesystem::path& baseDir);
    std::string to_string() const;
};

struct ExperimentSpec {
    std::filesystem::path grammarPath;
    std::optional<std::filesystem::path> groupingSpecPath;
    BenchmarkSpec benchmark;
    EvolutionConfig config;
    std::size_t runs = 1;
    std::uint64_t baseSeed = 0;
    double trainFraction = 0.7;
    std::filesystem::path outputDir;

    /// Parses flat `key = value` text; `#` starts a comment line. Relative
    /// paths resolve against `baseDir`. Unknown keys are errors.
    static ExperimentSpec parse(const std::string& text, const std::filesystem::path& baseDir);
    static ExperimentSpec load(const std::filesystem::path& path);

    /// Fully resolved configuration in the same key = value format.
    std::string echo() const;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

void write_run_csv(std::ostream& out, const RunLog& log, std::uint64_t seed);

struct RunSummary {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double bestTrain = 0.0;
    double bestTest = 0.0;
    std::string bestPhenotype;
};

Dataset load_benchmark(const ExperimentSpec& spec);
Grammar load_experiment_grammar(const ExperimentSpec& spec, std::size_t dimensions);

/// Runs one seeded evolution on `data`, returning the run log.
EvolutionResult run_single(const EvolutionConfig& config, const Grammar& grammar, const Dataset& data);

/// Runs every seed, writing run_<seed>.csv, summary.csv and spec_echo.txt
/// into spec.outputDir. `threads` = 0 means one worker per run.
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec, std::size_t threads = 0);

/// Final best train fitness column of a summary.csv.
std::vector<double> read_summary(const std::filesystem::path& dir);

ComparisonResult compare_dirs(const std::filesystem::path& dirA, const std::filesystem::path& dirB);

} // namespace gramevo
