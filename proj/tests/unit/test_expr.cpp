#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>

#include "upk/errors.hpp"
#include "upk/expr.hpp"

using namespace upk;
using Catch::Approx;

namespace {

double ev(const std::string& text, double lambda = 0.0, double x = 0.0, double s = 0.0, double t = 0.0) {
    return Expr::parse(text).eval(Bindings{}.lambda(lambda).x(x).s(s).t(t).y(0.0));
}

// Random expression text of bounded depth over lambda and x. Only smooth, total operations
// appear so that every binding is admissible.
std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    std::uniform_real_distribution<double> num(-2.0, 2.0);
    switch (pick(rng)) {
        case 0: return "lambda";
        case 1: return "x";
        case 2: return "(" + std::to_string(num(rng)) + ")";
        case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
        case 4: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
        case 5: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
        case 6: return "sin(" + random_expr(rng, depth - 1) + ")";
        case 7: return "cos(" + random_expr(rng, depth - 1) + ")";
        case 8: return "tanh(" + random_expr(rng, depth - 1) + ")";
        case 9: return "exp(0.3*sin(" + random_expr(rng, depth - 1) + "))";
        case 10: return "(" + random_expr(rng, depth - 1) + ") / (2 + cos(" + random_expr(rng, depth - 1) + "))";
        default: return "(" + random_expr(rng, depth - 1) + ")^2";
    }
}

}  // namespace

TEST_CASE("arithmetic values", "[expr]") {
    CHECK(ev("lambda^2/2", 3.0) == 4.5);
    CHECK(ev("sin(lambda)", 0.0) == 0.0);
    CHECK(ev("-(x+1)*2", 0.0, 1.0) == -4.0);
    CHECK(ev("lambda", 7.0) == 7.0);
    CHECK(ev("exp(0)") == 1.0);
    CHECK(ev("lambda^2/2 + sin(x)", 2.0, 0.0) == 2.0);
    CHECK(ev("1.5e-3*1000") == Approx(1.5));
    CHECK(ev("2.5E2") == 250.0);
    CHECK(ev("min(3, lambda) + max(-1, x)", 5.0, -4.0) == 2.0);
    CHECK(ev("abs(-2) + sqrt(9) + tanh(0)") == 5.0);
    CHECK(ev("pi") == Approx(M_PI));
    CHECK(ev("s*t", 0, 0, 3.0, 2.0) == 6.0);
}

TEST_CASE("precedence and associativity", "[expr]") {
    CHECK(ev("2^3^2") == 512.0);
    CHECK(ev("2-3-4") == -5.0);
    CHECK(ev("8/4/2") == 1.0);
    CHECK(ev("-2^2") == -4.0);
    CHECK(ev("2*3+4*5") == 26.0);
    CHECK(ev("2^-1") == 0.5);
    CHECK(ev("(2+3)*4") == 20.0);
}

TEST_CASE("syntax errors carry the byte offset", "[expr]") {
    try {
        Expr::parse("lambda + * 2");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 9);
    }
    CHECK_THROWS_AS(Expr::parse("2 lambda"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("sin(1"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("foo(1)"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("min(1)"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse(""), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("1 +"), SyntaxError);
    CHECK_THROWS_AS(Expr::parse("z"), SyntaxError);
}

TEST_CASE("evaluation errors", "[expr]") {
    CHECK_THROWS_AS(Expr::parse("lambda").eval(Bindings{}), UnboundVariable);
    CHECK_THROWS_AS(Expr::parse("1/lambda").eval(Bindings{}.lambda(0.0)), DomainError);
    CHECK_THROWS_AS(Expr::parse("sqrt(lambda)").eval(Bindings{}.lambda(-1.0)), DomainError);
    CHECK_THROWS_AS(Bindings::from_map({{"q", 1.0}}), UnboundVariable);
    CHECK(Expr::parse("x + lambda").eval(std::map<std::string, double>{{"x", 1.0}, {"lambda", 2.0}}) == 3.0);
}

TEST_CASE("dual evaluation", "[expr]") {
    const Dual a = Expr::parse("lambda^2/2").eval_dual(Bindings{}.lambda(3.0), Var::Lambda);
    CHECK(a.value == 4.5);
    CHECK(a.deriv == Approx(3.0));
    const Dual b = Expr::parse("sin(lambda)").eval_dual(Bindings{}.lambda(0.0), Var::Lambda);
    CHECK(b.value == 0.0);
    CHECK(b.deriv == 1.0);
    const Dual c = Expr::parse("lambda*exp(lambda)").eval_dual(Bindings{}.lambda(1.0), Var::Lambda);
    CHECK(c.value == Approx(std::exp(1.0)));
    CHECK(c.deriv == Approx(2.0 * std::exp(1.0)));
    // Seed selects the variable.
    const Dual d = Expr::parse("x*lambda").eval_dual(Bindings{}.lambda(2.0).x(5.0), Var::X);
    CHECK(d.deriv == 2.0);
}

TEST_CASE("kinks take the right limit", "[expr]") {
    CHECK(Expr::parse("abs(lambda)").eval_dual(Bindings{}.lambda(0.0), Var::Lambda).deriv == 1.0);
    CHECK(Expr::parse("max(lambda, 0)").eval_dual(Bindings{}.lambda(0.0), Var::Lambda).deriv == 1.0);
    CHECK(Expr::parse("min(lambda, 0)").eval_dual(Bindings{}.lambda(0.0), Var::Lambda).deriv == 0.0);
}

TEST_CASE("dual derivative matches central differences on random expressions", "[expr][property]") {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> point(-1.5, 1.5);
    for (int n = 0; n < 100; ++n) {
        const std::string text = random_expr(rng, 6);
        const Expr e = Expr::parse(text);
        const double lam = point(rng);
        const double x = point(rng);
        const double h = 1e-5;
        const auto f = [&](double l) { return e.eval(Bindings{}.lambda(l).x(x)); };
        const double fd = (f(lam + h) - f(lam - h)) / (2.0 * h);
        const Dual d = e.eval_dual(Bindings{}.lambda(lam).x(x), Var::Lambda);
        INFO(text << " at lambda = " << lam << ", x = " << x);
        CHECK(std::fabs(d.deriv - fd) <= 1e-6 * (1.0 + std::fabs(d.deriv)));
        CHECK(d.value == f(lam));
    }
}

TEST_CASE("print round-trips", "[expr][property]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    for (int n = 0; n < 50; ++n) {
        const Expr e = Expr::parse(random_expr(rng, 6));
        const Expr back = Expr::parse(e.print());
        for (int k = 0; k < 32; ++k) {
            const Bindings b = Bindings{}.lambda(point(rng)).x(point(rng));
            CHECK(back.eval(b) == e.eval(b));
        }
    }
    const Expr nested = Expr::parse("-(2^-x)^3 - -lambda");
    const Bindings b = Bindings{}.lambda(0.7).x(1.3);
    CHECK(Expr::parse(nested.print()).eval(b) == nested.eval(b));
}

TEST_CASE("dependency mask", "[expr]") {
    const Expr e = Expr::parse("x * sin(lambda)");
    CHECK(e.depends_on(Var::X));
    CHECK(e.depends_on(Var::Lambda));
    CHECK_FALSE(e.depends_on(Var::S));
    CHECK(Expr::parse("2*pi").is_constant());
    CHECK(Expr::constant(3.5).eval(Bindings{}) == 3.5);
    CHECK(Expr().eval(Bindings{}) == 0.0);
}
