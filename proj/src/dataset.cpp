#include "gramevo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gramevo/random.hpp"

namespace gramevo {

Dataset::Dataset(std::string name, std::size_t dimensions, std::vector<double> inputs, std::vector<double> targets,
                 std::vector<std::size_t> trainRows, std::vector<std::size_t> testRows)
    : name_(std::move(name)), dimensions_(dimensions), inputs_(std::move(inputs)), targets_(std::move(targets)),
      trainRows_(std::move(trainRows)), testRows_(std::move(testRows))
{
    if (dimensions_ == 0) {
        throw std::invalid_argument("dataset needs at least one input column");
    }
    if (inputs_.size() != targets_.size() * dimensions_) {
        throw std::invalid_argument("input row count does not match target count");
    }
    std::vector<int> seen(targets_.size(), 0);
    for (auto const* part : {&trainRows_, &testRows_}) {
        for (auto r : *part) {
            if (r >= targets_.size() || seen[r]++ != 0) {
                throw std::invalid_argument("train/test split is not a partition of the rows");
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw std::invalid_argument("train/test split does not cover every row");
    }
}

double quartic_target(double x) { return x + x * x + x * x * x + x * x * x * x; }

double pagie_target(double x, double y)
{
    auto term = [](double v) {
        auto const v4 = v * v * v * v;
        return v4 / (1.0 + v4);
    };
    return term(x) + term(y);
}

Dataset make_quartic()
{
    std::vector<double> inputs;
    std::vector<double> targets;
    for (int k = 0; k <= 20; ++k) {
        double const x = -1.0 + 0.1 * k;
        inputs.push_back(x);
        targets.push_back(quartic_target(x));
    }
    std::vector<std::size_t> train(targets.size());
    std::iota(train.begin(), train.end(), 0);
    return Dataset("quartic", 1, std::move(inputs), std::move(targets), std::move(train), {});
}

Dataset make_pagie()
{
    std::vector<double> inputs;
    std::vector<double> targets;
    for (int i = 0; i <= 25; ++i) {
        for (int j = 0; j <= 25; ++j) {
            double const x = -5.0 + 0.4 * i;
            double const y = -5.0 + 0.4 * j;
            inputs.push_back(x);
            inputs.push_back(y);
            targets.push_back(pagie_target(x, y));
        }
    }
    std::vector<std::size_t> train(targets.size());
    std::iota(train.begin(), train.end(), 0);
    return Dataset("pagie", 2, std::move(inputs), std::move(targets), std::move(train), {});
}

namespace {

std::vector<std::string> split_csv_line(std::string const& line)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char const c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

double parse_cell(std::string const& cell, std::size_t line, std::size_t column)
{
    auto b = cell.find_first_not_of(" \t");
    auto e = cell.find_last_not_of(" \t");
    double v = 0.0;
    if (b != std::string::npos) {
        auto const* first = cell.data() + b;
        auto const* last = cell.data() + e + 1;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec == std::errc{} && ptr == last) {
            return v;
        }
    }
    throw std::runtime_error("non-numeric cell '" + cell + "' at line " + std::to_string(line) + ", column " +
                             std::to_string(column));
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& targetColumn, double trainFraction, std::uint64_t seed)
{
    if (!(trainFraction >= 0.0 && trainFraction <= 1.0)) {
        throw std::invalid_argument("trainFraction must lie in [0,1]");
    }
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open dataset " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("dataset " + path + " is empty");
    }
    auto const header = split_csv_line(line);
    auto const targetIt = std::find(header.begin(), header.end(), targetColumn);
    if (targetIt == header.end()) {
        throw std::runtime_error("target column '" + targetColumn + "' not found in " + path);
    }
    auto const targetIndex = static_cast<std::size_t>(targetIt - header.begin());
    if (header.size() < 2) {
        throw std::runtime_error("dataset " + path + " has no input columns");
    }

    std::vector<double> inputs;
    std::vector<double> targets;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto const cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("line " + std::to_string(lineNo) + " of " + path + " has " +
                                     std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto const v = parse_cell(cells[c], lineNo, c + 1);
            (c == targetIndex ? targets : inputs).push_back(v);
        }
    }
    if (targets.empty()) {
        throw std::runtime_error("dataset " + path + " has no data rows");
    }

    std::vector<std::size_t> order(targets.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_stream(seed, 0, 0, StreamPurpose::DataSplit);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    auto const trainCount = static_cast<std::size_t>(std::floor(trainFraction * static_cast<double>(order.size())));
    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(trainCount));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(trainCount), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());

    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) {
        name = name.substr(slash + 1);
    }
    return Dataset(name, header.size() - 1, std::move(inputs), std::move(targets), std::move(train), std::move(test));
}

double rmse(std::span<const double> predictions, std::span<const double> targets)
{
    if (predictions.size() != targets.size()) {
        throw std::invalid_argument("rmse: prediction and target lengths differ");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("rmse: empty input");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double const d = predictions[i] - targets[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double rmse_on(const Expression& tree, const Dataset& data, std::span<const std::size_t> rows)
{
    if (rows.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> predictions;
    std::vector<double> targets;
    predictions.reserve(rows.size());
    targets.reserve(rows.size());
    for (auto r : rows) {
        auto const p = eval_tree(tree, data.row(r));
        if (!std::isfinite(p)) {
            return std::numeric_limits<double>::infinity();
        }
        predictions.push_back(p);
        targets.push_back(data.target(r));
    }
    return rmse(predictions, targets);
}

} // namespace gramevo
