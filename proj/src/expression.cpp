#include "gramevo/expression.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gramevo {

int arity(OpCode op) noexcept
{
    switch (op) {
    case OpCode::Constant:
    case OpCode::Variable:
        return 0;
    case OpCode::Sin:
    case OpCode::Cos:
    case OpCode::Sqrt:
    case OpCode::Square:
        return 1;
    default:
        return 2;
    }
}

std::optional<OpCode> operator_for_terminal(std::string_view token) noexcept
{
    if (token == "+") return OpCode::Add;
    if (token == "-") return OpCode::Sub;
    if (token == "*") return OpCode::Mul;
    if (token == "/") return OpCode::Div;
    if (token == "sin") return OpCode::Sin;
    if (token == "cos") return OpCode::Cos;
    if (token == "sqrt") return OpCode::Sqrt;
    if (token == "square") return OpCode::Square;
    return std::nullopt;
}

Expression::Expression(std::vector<ExprNode> postfix) : nodes_(std::move(postfix))
{
    std::ptrdiff_t stack = 0;
    for (auto const& n : nodes_) {
        stack -= arity(n.op);
        if (stack < 0) {
            throw std::invalid_argument("malformed postfix expression");
        }
        ++stack;
    }
    if (!nodes_.empty() && stack != 1) {
        throw std::invalid_argument("malformed postfix expression");
    }
}

std::optional<std::uint32_t> Expression::max_variable() const
{
    std::optional<std::uint32_t> best;
    for (auto const& n : nodes_) {
        if (n.op == OpCode::Variable && (!best || n.index > *best)) {
            best = n.index;
        }
    }
    return best;
}

namespace {

std::string format_constant(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

char const* symbol_of(OpCode op)
{
    switch (op) {
    case OpCode::Add: return "+";
    case OpCode::Sub: return "-";
    case OpCode::Mul: return "*";
    case OpCode::Div: return "/";
    case OpCode::Sin: return "sin";
    case OpCode::Cos: return "cos";
    case OpCode::Sqrt: return "sqrt";
    case OpCode::Square: return "square";
    default: return "?";
    }
}

} // namespace

std::string render_tree(const Expression& tree)
{
    std::vector<std::string> stack;
    for (auto const& n : tree.nodes()) {
        switch (arity(n.op)) {
        case 0:
            stack.push_back(n.op == OpCode::Constant ? format_constant(n.value) : "x[" + std::to_string(n.index) + "]");
            break;
        case 1: {
            auto arg = std::move(stack.back());
            stack.back() = std::string(symbol_of(n.op)) + "(" + arg + ")";
            break;
        }
        default: {
            auto rhs = std::move(stack.back());
            stack.pop_back();
            stack.back() = "(" + stack.back() + " " + symbol_of(n.op) + " " + rhs + ")";
        }
        }
    }
    return stack.empty() ? std::string{} : stack.back();
}

double eval_tree(const Expression& tree, std::span<const double> inputRow)
{
    using protected_ops::kDivisionEpsilon;
    using protected_ops::kSaturation;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    if (tree.empty()) {
        throw std::invalid_argument("cannot evaluate an empty expression");
    }
    std::vector<double> stack;
    stack.reserve(tree.size());
    for (auto const& n : tree.nodes()) {
        double v = 0.0;
        switch (n.op) {
        case OpCode::Constant:
            v = n.value;
            break;
        case OpCode::Variable:
            if (n.index >= inputRow.size()) {
                throw std::out_of_range("variable x[" + std::to_string(n.index) + "] outside input row of size " +
                                        std::to_string(inputRow.size()));
            }
            v = inputRow[n.index];
            break;
        case OpCode::Sin: v = std::sin(stack.back()); stack.pop_back(); break;
        case OpCode::Cos: v = std::cos(stack.back()); stack.pop_back(); break;
        case OpCode::Sqrt: v = std::sqrt(std::abs(stack.back())); stack.pop_back(); break;
        case OpCode::Square: v = stack.back() * stack.back(); stack.pop_back(); break;
        default: {
            double const b = stack.back();
            stack.pop_back();
            double const a = stack.back();
            stack.pop_back();
            switch (n.op) {
            case OpCode::Add: v = a + b; break;
            case OpCode::Sub: v = a - b; break;
            case OpCode::Mul: v = a * b; break;
            default: v = std::abs(b) < kDivisionEpsilon ? 1.0 : a / b; break;
            }
        }
        }
        if (!(std::abs(v) <= kSaturation)) {
            return kInf;
        }
        stack.push_back(v);
    }
    return stack.back();
}

} // namespace gramevo
