#include "upk/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "upk/errors.hpp"

namespace upk {

namespace {

struct FunctionInfo {
    std::string_view name;
    Expr::Op op;
    int arity;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {"sin", Expr::Op::Sin, 1},
    {"cos", Expr::Op::Cos, 1},
    {"exp", Expr::Op::Exp, 1},
    {"tanh", Expr::Op::Tanh, 1},
    {"sqrt", Expr::Op::Sqrt, 1},
    {"abs", Expr::Op::Abs, 1},
    {"min", Expr::Op::Min, 2},
    {"max", Expr::Op::Max, 2},
}};

constexpr std::array<std::string_view, kVarCount> kVarNames{"lambda", "x", "y", "s", "t"};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Recursive-descent parser producing a flat node arena.
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::pair<std::vector<Expr::Node>, std::int32_t> run() {
        const std::int32_t root = sum();
        skip_space();
        if (pos_ != text_.size()) fail("operator or end of input");
        return {std::move(nodes_), root};
    }

private:
    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
        throw SyntaxError(pos_, expected, found);
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("'") + c + "'");
    }

    std::int32_t push(Expr::Node n) {
        nodes_.push_back(n);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    std::int32_t binary(Expr::Op op, std::int32_t l, std::int32_t r) {
        Expr::Node n;
        n.op = op;
        n.lhs = l;
        n.rhs = r;
        return push(n);
    }

    std::int32_t sum() {
        std::int32_t lhs = product();
        for (;;) {
            if (accept('+'))
                lhs = binary(Expr::Op::Add, lhs, product());
            else if (accept('-'))
                lhs = binary(Expr::Op::Sub, lhs, product());
            else
                return lhs;
        }
    }

    std::int32_t product() {
        std::int32_t lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = binary(Expr::Op::Mul, lhs, unary());
            else if (accept('/'))
                lhs = binary(Expr::Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    std::int32_t unary() {
        if (accept('-')) return binary(Expr::Op::Neg, unary(), -1);
        return power();
    }

    std::int32_t power() {
        const std::int32_t base = primary();
        if (accept('^')) return binary(Expr::Op::Pow, base, unary());
        return base;
    }

    std::int32_t number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ == start + 1 && text_[start] == '.') {
            pos_ = start;
            fail("digit");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p >= text_.size() || !is_digit(text_[p])) {
                pos_ = p;
                fail("exponent digits");
            }
            while (p < text_.size() && is_digit(text_[p])) ++p;
            pos_ = p;
        }
        double value = 0.0;
        const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
            pos_ = start;
            fail("number");
        }
        Expr::Node n;
        n.op = Expr::Op::Number;
        n.number = value;
        return push(n);
    }

    std::int32_t primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("number, variable, function or '('");
        const char c = text_[pos_];
        if (is_digit(c) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            const std::int32_t inner = sum();
            expect(')');
            return inner;
        }
        if (!is_ident_start(c)) fail("number, variable, function or '('");

        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        const std::string_view ident = text_.substr(start, pos_ - start);

        for (std::size_t i = 0; i < kVarNames.size(); ++i) {
            if (ident == kVarNames[i]) {
                Expr::Node n;
                n.op = Expr::Op::Variable;
                n.var = static_cast<Var>(i);
                return push(n);
            }
        }
        if (ident == "pi") {
            Expr::Node n;
            n.number = std::numbers::pi;
            return push(n);
        }
        for (const auto& f : kFunctions) {
            if (ident != f.name) continue;
            expect('(');
            const std::int32_t a = sum();
            std::int32_t b = -1;
            if (f.arity == 2) {
                expect(',');
                b = sum();
            }
            expect(')');
            return binary(f.op, a, b);
        }
        pos_ = start;
        fail("variable (lambda, x, y, s, t), 'pi' or function name");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<Expr::Node> nodes_;
};

double checked_div(double a, double b) {
    if (b == 0.0) throw DomainError("division by zero");
    return a / b;
}

double checked_sqrt(double a) {
    if (a < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(a));
    return std::sqrt(a);
}

double checked_pow(double a, double b) {
    if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
    const double r = std::pow(a, b);
    if (std::isnan(r) && !std::isnan(a) && !std::isnan(b))
        throw DomainError("negative base raised to a non-integer power");
    return r;
}

Dual dual_pow(Dual a, Dual b) {
    const double value = checked_pow(a.value, b.value);
    if (b.deriv == 0.0) {
        if (a.deriv == 0.0) return {value, 0.0};
        return {value, b.value * std::pow(a.value, b.value - 1.0) * a.deriv};
    }
    if (a.value <= 0.0) {
        if (a.value == 0.0 && b.value > 0.0 && a.deriv == 0.0) return {0.0, 0.0};
        throw DomainError("variable exponent requires a positive base");
    }
    return {value, value * (b.deriv * std::log(a.value) + b.value * a.deriv / a.value)};
}

struct DoubleEval {
    const std::vector<Expr::Node>& nodes;
    const Bindings& b;

    double operator()(std::int32_t i) const {
        const Expr::Node& n = nodes[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Expr::Op::Number: return n.number;
            case Expr::Op::Variable:
                if (!b.bound(n.var)) throw UnboundVariable("unbound variable '" + std::string(var_name(n.var)) + "'");
                return b[n.var];
            case Expr::Op::Neg: return -(*this)(n.lhs);
            case Expr::Op::Add: return (*this)(n.lhs) + (*this)(n.rhs);
            case Expr::Op::Sub: return (*this)(n.lhs) - (*this)(n.rhs);
            case Expr::Op::Mul: return (*this)(n.lhs) * (*this)(n.rhs);
            case Expr::Op::Div: return checked_div((*this)(n.lhs), (*this)(n.rhs));
            case Expr::Op::Pow: return checked_pow((*this)(n.lhs), (*this)(n.rhs));
            case Expr::Op::Sin: return std::sin((*this)(n.lhs));
            case Expr::Op::Cos: return std::cos((*this)(n.lhs));
            case Expr::Op::Exp: return std::exp((*this)(n.lhs));
            case Expr::Op::Tanh: return std::tanh((*this)(n.lhs));
            case Expr::Op::Sqrt: return checked_sqrt((*this)(n.lhs));
            case Expr::Op::Abs: return std::fabs((*this)(n.lhs));
            case Expr::Op::Min: return std::min((*this)(n.lhs), (*this)(n.rhs));
            case Expr::Op::Max: return std::max((*this)(n.lhs), (*this)(n.rhs));
        }
        return 0.0;
    }
};

struct DualEval {
    const std::vector<Expr::Node>& nodes;
    const Bindings& b;
    Var seed;

    Dual operator()(std::int32_t i) const {
        const Expr::Node& n = nodes[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Expr::Op::Number: return Dual::constant(n.number);
            case Expr::Op::Variable:
                if (!b.bound(n.var)) throw UnboundVariable("unbound variable '" + std::string(var_name(n.var)) + "'");
                return {b[n.var], n.var == seed ? 1.0 : 0.0};
            case Expr::Op::Neg: return -(*this)(n.lhs);
            case Expr::Op::Add: return (*this)(n.lhs) + (*this)(n.rhs);
            case Expr::Op::Sub: return (*this)(n.lhs) - (*this)(n.rhs);
            case Expr::Op::Mul: return (*this)(n.lhs) * (*this)(n.rhs);
            case Expr::Op::Div: {
                const Dual num = (*this)(n.lhs);
                const Dual den = (*this)(n.rhs);
                if (den.value == 0.0) throw DomainError("division by zero");
                return num / den;
            }
            case Expr::Op::Pow: return dual_pow((*this)(n.lhs), (*this)(n.rhs));
            case Expr::Op::Sin: return sin((*this)(n.lhs));
            case Expr::Op::Cos: return cos((*this)(n.lhs));
            case Expr::Op::Exp: return exp((*this)(n.lhs));
            case Expr::Op::Tanh: return tanh((*this)(n.lhs));
            case Expr::Op::Sqrt: {
                const Dual a = (*this)(n.lhs);
                checked_sqrt(a.value);
                return sqrt(a);
            }
            case Expr::Op::Abs: return abs((*this)(n.lhs));
            case Expr::Op::Min: return min((*this)(n.lhs), (*this)(n.rhs));
            case Expr::Op::Max: return max((*this)(n.lhs), (*this)(n.rhs));
        }
        return {};
    }
};

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const std::vector<Expr::Node>& nodes, std::int32_t i, std::string& out) {
    const Expr::Node& n = nodes[static_cast<std::size_t>(i)];
    auto bin = [&](const char* sym) {
        out += '(';
        print_node(nodes, n.lhs, out);
        out += sym;
        print_node(nodes, n.rhs, out);
        out += ')';
    };
    auto call = [&](std::string_view name) {
        out += name;
        out += '(';
        print_node(nodes, n.lhs, out);
        if (n.rhs >= 0) {
            out += ", ";
            print_node(nodes, n.rhs, out);
        }
        out += ')';
    };
    switch (n.op) {
        case Expr::Op::Number: {
            // Literals are non-negative in the grammar; negative constants print as a negation.
            if (std::signbit(n.number)) {
                out += "(-" + format_number(-n.number) + ")";
            } else {
                out += format_number(n.number);
            }
            return;
        }
        case Expr::Op::Variable: out += var_name(n.var); return;
        case Expr::Op::Neg:
            out += "(-";
            print_node(nodes, n.lhs, out);
            out += ')';
            return;
        case Expr::Op::Add: bin(" + "); return;
        case Expr::Op::Sub: bin(" - "); return;
        case Expr::Op::Mul: bin(" * "); return;
        case Expr::Op::Div: bin(" / "); return;
        case Expr::Op::Pow: bin(" ^ "); return;
        case Expr::Op::Sin: call("sin"); return;
        case Expr::Op::Cos: call("cos"); return;
        case Expr::Op::Exp: call("exp"); return;
        case Expr::Op::Tanh: call("tanh"); return;
        case Expr::Op::Sqrt: call("sqrt"); return;
        case Expr::Op::Abs: call("abs"); return;
        case Expr::Op::Min: call("min"); return;
        case Expr::Op::Max: call("max"); return;
    }
}

unsigned collect_free(const std::vector<Expr::Node>& nodes) {
    unsigned mask = 0;
    for (const auto& n : nodes)
        if (n.op == Expr::Op::Variable) mask |= 1u << static_cast<unsigned>(n.var);
    return mask;
}

}  // namespace

std::string_view var_name(Var v) { return kVarNames[static_cast<std::size_t>(v)]; }

Bindings Bindings::from_map(const std::map<std::string, double>& named) {
    Bindings b;
    for (const auto& [name, value] : named) {
        bool found = false;
        for (std::size_t i = 0; i < kVarNames.size(); ++i) {
            if (name == kVarNames[i]) {
                b.set(static_cast<Var>(i), value);
                found = true;
            }
        }
        if (!found) throw UnboundVariable("unknown variable '" + name + "'");
    }
    return b;
}

Expr::Expr() : Expr(std::make_shared<const std::vector<Node>>(std::vector<Node>{Node{}}), 0) {}

Expr::Expr(std::shared_ptr<const std::vector<Node>> nodes, std::int32_t root)
    : nodes_(std::move(nodes)), root_(root), free_mask_(collect_free(*nodes_)) {}

Expr Expr::parse(std::string_view text) {
    auto [nodes, root] = Parser(text).run();
    return Expr(std::make_shared<const std::vector<Node>>(std::move(nodes)), root);
}

Expr Expr::constant(double value) {
    Node n;
    n.number = value;
    return Expr(std::make_shared<const std::vector<Node>>(std::vector<Node>{n}), 0);
}

double Expr::eval(const Bindings& b) const { return DoubleEval{*nodes_, b}(root_); }

double Expr::eval(const std::map<std::string, double>& named) const { return eval(Bindings::from_map(named)); }

Dual Expr::eval_dual(const Bindings& b, Var seed) const {
    if (!b.bound(seed)) throw UnboundVariable("seed variable '" + std::string(var_name(seed)) + "' is unbound");
    return DualEval{*nodes_, b, seed}(root_);
}

std::string Expr::print() const {
    std::string out;
    print_node(*nodes_, root_, out);
    return out;
}

}  // namespace upk
