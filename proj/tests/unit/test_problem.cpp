#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "unit/fixtures.hpp"
#include "upk/errors.hpp"
#include "upk/problem.hpp"

using namespace upk;
using namespace upk::testing;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// Dense scan of xi -> e^{xi t} max{D, sqrt(c2 / (xi - c1))}.
double scan_min(double D, double t, double c1, double c2) {
    double best = 1e300;
    for (int i = 1; i <= 2000000; ++i) {
        const double xi = c1 + 50.0 * i / 2000000.0;
        best = std::min(best, std::exp(xi * t) * std::max(D, std::sqrt(c2 / (xi - c1))));
    }
    return best;
}

}  // namespace

TEST_CASE("validation accepts the fixtures", "[problem]") {
    CHECK_NOTHROW(validate(burgers_spec()));
    CHECK_NOTHROW(validate(source_spec(0.1)));
    CHECK_NOTHROW(validate(source_spec(0.0)));
}

TEST_CASE("validation names the violated invariant", "[problem]") {
    SECTION("a(0) != 0") {
        ProblemSpec p = burgers_spec();
        p.s_flux = Expr::parse("lambda^2/2 + 0.3");
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("flux a: a(0) = 0.3"));
    }
    SECTION("phi(0) != 0") {
        ProblemSpec p = burgers_spec();
        p.x_flux = {Expr::parse("cos(lambda)")};
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("flux phi_1"));
    }
    SECTION("gamma above gamma0 / 2") {
        CHECK_THROWS_WITH(validate(source_spec(0.3)), ContainsSubstring("gamma0"));
    }
    SECTION("tau outside (0, T)") {
        ProblemSpec p = source_spec(0.1);
        p.impulse_time = 1.2;
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("impulse time tau"));
    }
    SECTION("initial data on the boundary") {
        ProblemSpec p = burgers_spec();
        p.initial_data = Expr::parse("1 + 0*x");
        CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SECTION("boundary data near t = 0") {
        ProblemSpec p = burgers_spec();
        p.s0_data = Expr::parse(bump("x", 1.0, 0.5));
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("u0_2"));
    }
    SECTION("beta beyond b1") {
        ProblemSpec p = source_spec(0.1);
        p.impulse_support = 1.0;
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("b1"));
    }
    SECTION("beta on the boundary") {
        ProblemSpec p = source_spec(0.1);
        p.impulse = Expr::parse("0.1*min(1, max(0, (2 - abs(lambda))/0.5))");
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("boundary"));
    }
    SECTION("dimension") {
        ProblemSpec p = burgers_spec();
        p.dim = 3;
        CHECK_THROWS_AS(validate(p), ValidationError);
    }
    SECTION("missing phi component") {
        ProblemSpec p = burgers_spec();
        p.dim = 2;
        CHECK_THROWS_WITH(validate(p), ContainsSubstring("expected 2 components"));
    }
}

TEST_CASE("data norms", "[problem]") {
    ProblemSpec p = burgers_spec(1.5);
    p.s0_data = Expr::parse("0.7*" + bump("x", 1.0, 0.5) + "*" + bump("t", 0.75, 0.2));
    const DataNorms n(p);
    CHECK(n.initial() == Approx(1.5).epsilon(1e-3));
    CHECK(n.s0(0.0, 0.5) == 0.0);
    CHECK(n.s0(0.0, 1.0) == Approx(0.7).epsilon(1e-3));
    CHECK(n.sS(0.0, 1.0) == 0.0);
    CHECK(n.all(0.5) == n.initial());
    CHECK(n.all() == n.initial());
}

TEST_CASE("maximum principle value", "[problem]") {
    // Unit data, c1 = c2 = t' = 1: the minimiser sits at xi = 3/2 where the square-root branch is active.
    const double v = max_principle_value(1.0, 1.0, 1.0, 1.0);
    CHECK(v == Approx(std::exp(1.5) * std::sqrt(2.0)).epsilon(1e-9));
    CHECK(v == Approx(scan_min(1.0, 1.0, 1.0, 1.0)).epsilon(1e-6));
    CHECK(max_principle_value(2.0, 0.3, 4.0, 0.5) == Approx(scan_min(2.0, 0.3, 4.0, 0.5)).epsilon(1e-6));
    CHECK(max_principle_value(1.0, 1.0, 20.0, 3.0) == Approx(scan_min(1.0, 1.0, 20.0, 3.0)).epsilon(1e-6));
    // c2 = 0: e^{c1 t'} D.
    CHECK(max_principle_value(1.5, 0.5, 2.0, 0.0) == Approx(1.5 * std::exp(1.0)));
    // Monotone in t'.
    CHECK(max_principle_value(1.0, 0.2, 3.0, 1.0) < max_principle_value(1.0, 0.4, 3.0, 1.0));
}

TEST_CASE("refined exponent", "[problem]") {
    // b1 = 1, |u0| = 1, tau = 0.5, gamma0 = 0.5: 2/(2 tau - gamma0) = 4.
    CHECK(refined_exponent(1.0, 1.0, 0.5, 0.5) == Approx(4.0 * std::log(2.0)));
    CHECK(refined_exponent(3.0, 1.5, 0.5, 0.5) == 0.0);
    CHECK_THROWS_AS(refined_exponent(0.0, 1.0, 0.5, 0.5), ZeroInitialData);
    const ProblemSpec p = source_spec(0.1);
    const DataNorms n(p);
    const double xi = 4.0 * std::log(3.0 / n.initial());
    CHECK(refined_max_bound(p, n, 0.7) == Approx(std::exp(0.7 * xi) * n.all()));
}

TEST_CASE("stability right-hand side without a source", "[problem]") {
    const ProblemSpec p = burgers_spec();
    StabilityInputs in;
    in.t = 1.0;
    in.range = 2.0;
    in.initial_distance = 0.25;
    CHECK(stability_rhs(p, in) == 0.25);
    in.s0_distance = {0.25, {0.1, 0.1, 0.1, 0.1}};
    in.sS_distance = {0.25, {0.0, 0.2, 0.0, 0.0}};
    // max |a'| on [-2, 2] = 2; int (d0 + dS) = 0.25 (0.4 + 0.2)
    CHECK(stability_rhs(p, in) == Approx(0.25 + 2.0 * 0.15));
    // Additive in the initial distance.
    const double base = stability_rhs(p, in);
    in.initial_distance += 0.5;
    CHECK(stability_rhs(p, in) == Approx(base + 0.5));
    CHECK(max_abs_derivative(p.s_flux, 2.0) == 2.0);
}

TEST_CASE("growth exponent integrates the kernel", "[problem]") {
    const ProblemSpec p = source_spec(0.1);
    // K carries unit mass, so G jumps from 0 to b0 across (tau - gamma, tau).
    CHECK(growth_exponent(p, 0.3, 1e-3, 0.8) == 0.0);
    CHECK(growth_exponent(p, 1.0, 1e-4, 0.8) == Approx(0.8).epsilon(1e-6));
    StabilityInputs in;
    in.t = 1.0;
    in.initial_distance = 1.0;
    in.lambda_lipschitz = 0.8;
    in.range = 1.0;
    in.s0_distance = {1e-3, std::vector<double>(1000, 0.0)};
    in.sS_distance = in.s0_distance;
    CHECK(stability_rhs(p, in) == Approx(std::exp(0.8)).epsilon(1e-5));
    CHECK(growth_exponent(source_spec(0.0), 1.0, 1e-3, 0.8) == 0.0);
}

TEST_CASE("impulsive bounds", "[problem]") {
    const ProblemSpec p = source_spec(0.0, 0.5);
    const ImpulsiveBounds b = impulsive_bounds(p);
    CHECK(b.pre == Approx(1.0).epsilon(1e-3));
    // beta peaks at 0.5 for |lambda| <= 1.5
    CHECK(b.post == Approx(b.pre + 0.5).epsilon(1e-3));
    CHECK(source_sup(*p.impulse, p.box(), 1.0) == Approx(0.5).epsilon(5e-3));  // sampled, 64 points per axis
}

TEST_CASE("impulsive stability estimate", "[problem]") {
    const ProblemSpec p1 = source_spec(0.0, 0.5);
    ProblemSpec p2 = p1;
    p2.initial_data = Expr::parse("0.9*" + bump("x", 1.0, 0.6) + "*" + bump("s", 0.4, 0.3));
    const ImpulsiveStabilityBound bound(p1, p2);
    ImpulsiveStabilityInputs in;
    in.initial_distance = 0.05;
    in.t = 0.25;
    CHECK(bound(in) == Approx(0.05));
    in.t = 0.75;
    // Equal sources: the bracket gains max |d beta / d lambda| times the pre-tau estimate; the
    // trapezoid has slope c / 0.5 = 1 on 1.5 < |lambda| < 2, outside [-M5, M5] = [-1, 1].
    CHECK(bound(in) == Approx(0.05).margin(1e-12));
    CHECK(impulsive_stability_rhs(p1, p2, in) == bound(in));

    ProblemSpec q = source_spec(0.0, 0.5);
    q.impulse = Expr::parse("0.2*sin(lambda)*" + bump("x", 1.0, 0.6) + "*" + bump("s", 0.5, 0.3));
    q.impulse_support = 10.0;
    const ImpulsiveStabilityBound sb(q, q);
    CHECK(sb(in) == Approx(0.05 * (1.0 + 0.2)).epsilon(1e-3));
}

TEST_CASE("predicted sup bound", "[problem]") {
    CHECK(predicted_sup_bound(burgers_spec(1.5)) == Approx(1.5 * kNormInflation).epsilon(1e-3));
    const ProblemSpec imp = source_spec(0.0, 0.5);
    CHECK(predicted_sup_bound(imp) == Approx(impulsive_bounds(imp).post * kNormInflation));
    const ProblemSpec moll = source_spec(0.1, 0.5);
    const double m = predicted_sup_bound(moll);
    CHECK(m >= 1.0);
    CHECK(m <= refined_max_bound(moll, 1.0) * kNormInflation * (1.0 + 1e-12));
}

TEST_CASE("names", "[problem]") {
    CHECK(to_string(SolveMode::Impulsive) == "impulsive");
    CHECK(to_string(SolveMode::Regularized) == "regularized");
    CHECK(to_string(FluxKind::LaxFriedrichs) == "lf");
    CHECK(source_spec(0.0).is_impulsive());
    CHECK_FALSE(source_spec(0.1).is_impulsive());
    CHECK(source_spec(0.1).gamma0() == 0.5);
}
