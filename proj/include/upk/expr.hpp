#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "upk/dual.hpp"

namespace upk {

/// Free variables an expression may reference. `y` is the second spatial
/// coordinate when the problem is two-dimensional.
enum class Var : std::uint8_t { Lambda = 0, X = 1, Y = 2, S = 3, T = 4 };

inline constexpr std::size_t kVarCount = 5;

std::string_view var_name(Var v);

/// A (possibly partial) assignment of values to the free variables.
class Bindings {
public:
    Bindings() = default;

    Bindings& set(Var v, double value) {
        values_[static_cast<std::size_t>(v)] = value;
        mask_ |= bit(v);
        return *this;
    }
    Bindings& lambda(double v) { return set(Var::Lambda, v); }
    Bindings& x(double v) { return set(Var::X, v); }
    Bindings& y(double v) { return set(Var::Y, v); }
    Bindings& s(double v) { return set(Var::S, v); }
    Bindings& t(double v) { return set(Var::T, v); }

    bool bound(Var v) const { return (mask_ & bit(v)) != 0; }
    double operator[](Var v) const { return values_[static_cast<std::size_t>(v)]; }

    /// Keys are variable names ("lambda", "x", "y", "s", "t"); unknown names throw UnboundVariable.
    static Bindings from_map(const std::map<std::string, double>& named);

private:
    static constexpr std::uint8_t bit(Var v) { return std::uint8_t(1u << static_cast<unsigned>(v)); }

    std::array<double, kVarCount> values_{};
    std::uint8_t mask_ = 0;
};

/// Immutable arithmetic expression over lambda, x, y, s, t.
///
/// Grammar, loosest to tightest binding:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          (right-associative)
///   primary := number | variable | 'pi' | func '(' args ')' | '(' sum ')'
/// Functions: sin cos exp tanh sqrt abs (one argument), min max (two arguments).
/// Multiplication is always explicit.
///
/// Copies share the node storage; evaluation is const and thread-safe.
class Expr {
public:
    enum class Op : std::uint8_t {
        Number, Variable, Neg, Add, Sub, Mul, Div, Pow,
        Sin, Cos, Exp, Tanh, Sqrt, Abs, Min, Max
    };

    struct Node {
        Op op = Op::Number;
        Var var = Var::Lambda;
        double number = 0.0;
        std::int32_t lhs = -1;
        std::int32_t rhs = -1;
    };

    /// The constant expression 0.
    Expr();

    static Expr parse(std::string_view text);
    static Expr constant(double value);

    double eval(const Bindings& b) const;
    double eval(const std::map<std::string, double>& named) const;

    /// Value and derivative with respect to `seed`.
    Dual eval_dual(const Bindings& b, Var seed) const;

    /// Fully parenthesized text that parses back to an equivalent expression.
    std::string print() const;

    bool depends_on(Var v) const { return (free_mask_ & (1u << static_cast<unsigned>(v))) != 0; }
    bool is_constant() const { return free_mask_ == 0; }

    const std::vector<Node>& nodes() const { return *nodes_; }
    std::int32_t root() const { return root_; }

private:
    Expr(std::shared_ptr<const std::vector<Node>> nodes, std::int32_t root);

    std::shared_ptr<const std::vector<Node>> nodes_;
    std::int32_t root_ = 0;
    unsigned free_mask_ = 0;
};

inline Expr parse(std::string_view text) { return Expr::parse(text); }

}  // namespace upk
