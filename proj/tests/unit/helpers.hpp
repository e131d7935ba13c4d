#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gramevo/random.hpp"

namespace testing {

inline constexpr const char* kStandardGrammar = R"(<start> ::= <expr>
<expr> ::= <expr><op><expr> | <pre_op>(<expr>) | <var>
<op> ::= + | - | * | /
<pre_op> ::= sin | cos | sqrt | square
<var> ::= 1.0 | x[n]
)";

inline constexpr const char* kGroupedGrammar = R"(<start> ::= <expr_var>
<expr_var> ::= <expr> | <var>
<expr> ::= <expr_var><op><expr_var> | <pre_op>(<expr_var>)
<op> ::= + | - | * | /
<pre_op> ::= <trig_op> | <pow_op>
<trig_op> ::= sin | cos
<pow_op> ::= sqrt | square
<var> ::= 1.0 | x[n]
)";

inline constexpr const char* kTrigPowSplit = "split pre_op -> trig_op: 0,1\nsplit pre_op -> pow_op: 2,3\n";

inline std::filesystem::path source_dir() { return GRAMEVO_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto const dir = std::filesystem::temp_directory_path() / ("gramevo_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Replays fixed values; fails the test when asked for more.
class ScriptedRandom final : public gramevo::RandomSource {
public:
    explicit ScriptedRandom(std::vector<double> uniforms = {}, std::vector<double> normals = {},
                            std::vector<std::size_t> integers = {})
        : uniforms_(std::move(uniforms)), normals_(std::move(normals)), integers_(std::move(integers))
    {
    }

    double uniform() override { return next(uniforms_, u_, "uniform"); }
    double normal(double) override { return next(normals_, n_, "normal"); }
    std::size_t below(std::size_t) override { return next(integers_, i_, "below"); }

    std::size_t calls() const { return u_ + n_ + i_; }

private:
    template <typename T>
    static T next(const std::vector<T>& values, std::size_t& cursor, const char* what)
    {
        if (cursor >= values.size()) {
            throw std::logic_error(std::string("scripted random exhausted: ") + what);
        }
        return values[cursor++];
    }

    std::vector<double> uniforms_;
    std::vector<double> normals_;
    std::vector<std::size_t> integers_;
    std::size_t u_ = 0;
    std::size_t n_ = 0;
    std::size_t i_ = 0;
};

/// Returns the same values forever.
class ConstantRandom final : public gramevo::RandomSource {
public:
    explicit ConstantRandom(double u, double normal = 0.0, std::size_t integer = 0)
        : u_(u), normal_(normal), integer_(integer)
    {
    }

    double uniform() override { return u_; }
    double normal(double) override { return normal_; }
    std::size_t below(std::size_t n) override { return integer_ % n; }

private:
    double u_;
    double normal_;
    std::size_t integer_;
};

} // namespace testing
