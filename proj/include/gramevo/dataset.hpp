#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gramevo/expression.hpp"

namespace gramevo {

/// Regression data: row-major inputs, one target per row and a disjoint
/// train/test partition of the row indices.
class Dataset {
public:
    Dataset(std::string name, std::size_t dimensions, std::vector<double> inputs, std::vector<double> targets,
            std::vector<std::size_t> trainRows, std::vector<std::size_t> testRows);

    const std::string& name() const noexcept { return name_; }
    std::size_t rows() const noexcept { return targets_.size(); }
    std::size_t dimensions() const noexcept { return dimensions_; }

    std::span<const double> row(std::size_t i) const { return {inputs_.data() + i * dimensions_, dimensions_}; }
    double target(std::size_t i) const { return targets_.at(i); }
    std::span<const double> targets() const noexcept { return targets_; }

    const std::vector<std::size_t>& train_rows() const noexcept { return trainRows_; }
    const std::vector<std::size_t>& test_rows() const noexcept { return testRows_; }

private:
    std::string name_;
    std::size_t dimensions_;
    std::vector<double> inputs_;
    std::vector<double> targets_;
    std::vector<std::size_t> trainRows_;
    std::vector<std::size_t> testRows_;
};

/// x + x^2 + x^3 + x^4 on x = -1.0, -0.9, ..., 1.0; all rows train.
Dataset make_quartic();

/// 1/(1+x^-4) + 1/(1+y^-4) on the 26x26 grid over [-5, 5] with step 0.4;
/// all rows train.
Dataset make_pagie();

double quartic_target(double x);
double pagie_target(double x, double y);

/// Reads a headered, comma-separated numeric file. `targetColumn` names the
/// target; every other column is an input in file order. Rows are shuffled
/// with `seed` and the first floor(trainFraction * rows) become train rows.
Dataset load_csv(const std::string& path, const std::string& targetColumn, double trainFraction, std::uint64_t seed);

/// sqrt(mean((prediction - target)^2)). Throws on empty or unequal inputs.
double rmse(std::span<const double> predictions, std::span<const double> targets);

/// RMSE of `tree` over the given rows; non-finite when any prediction is.
double rmse_on(const Expression& tree, const Dataset& data, std::span<const std::size_t> rows);

} // namespace gramevo
