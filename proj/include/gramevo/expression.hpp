#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gramevo {

enum class OpCode : std::uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Sqrt,
    Square,
};

int arity(OpCode op) noexcept;

/// Operator named by a grammar terminal (`+`, `sin`, ...), if any.
std::optional<OpCode> operator_for_terminal(std::string_view token) noexcept;

struct ExprNode {
    OpCode op = OpCode::Constant;
    double value = 0.0;       // Constant
    std::uint32_t index = 0;  // Variable

    friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

/// Expression tree stored in postfix order (children before parent).
class Expression {
public:
    Expression() = default;
    explicit Expression(std::vector<ExprNode> postfix);

    std::span<const ExprNode> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    void push(ExprNode node) { nodes_.push_back(node); }

    /// Largest variable index used, or nullopt if none.
    std::optional<std::uint32_t> max_variable() const;

    friend bool operator==(const Expression&, const Expression&) = default;

private:
    std::vector<ExprNode> nodes_;
};

namespace protected_ops {
inline constexpr double kDivisionEpsilon = 1e-9;
inline constexpr double kSaturation = 1e12;
} // namespace protected_ops

/// Fully parenthesized infix text, e.g. `(x[0] + 1)` or `sin(x[0])`.
std::string render_tree(const Expression& tree);

/// Protected evaluation: x / y is 1 when |y| < 1e-9, sqrt uses |x|, and any
/// intermediate with magnitude above 1e12 makes the result +infinity.
/// Throws std::out_of_range when a variable index exceeds the row.
double eval_tree(const Expression& tree, std::span<const double> inputRow);

} // namespace gramevo
