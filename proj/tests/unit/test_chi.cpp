#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "upk/chi.hpp"
#include "upk/errors.hpp"

using namespace upk;
using Catch::Approx;

TEST_CASE("chi values", "[chi]") {
    CHECK(chi(0.5, 1.0) == 1);
    CHECK(chi(1.5, 1.0) == 0);
    CHECK(chi(-0.5, 1.0) == 0);
    CHECK(chi(-0.5, -1.0) == -1);
    CHECK(chi(0.5, -1.0) == 0);
    CHECK(chi(0.0, 1.0) == 0);
    CHECK(chi(1.0, 1.0) == 0);
    CHECK(chi(0.3, 0.0) == 0);
}

TEST_CASE("chi sign property", "[chi][property]") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double lam = u(rng);
        const double v = u(rng);
        const int c = chi(lam, v);
        CHECK((c == -1 || c == 0 || c == 1));
        const int sgn = lam > 0 ? 1 : lam < 0 ? -1 : 0;
        CHECK((c * sgn == 0 || c * sgn == 1));
    }
}

TEST_CASE("chi sample grid", "[chi]") {
    const ChiSample cs(0.5, 1.0, 8);
    CHECK(cs.cell_width() == 0.25);
    CHECK(cs.centers.front() == -0.875);
    // centres 0.125, 0.375 lie inside (0, 0.5)
    int ones = 0;
    for (int v : cs.values) ones += v;
    CHECK(ones == 2);
    CHECK_THROWS_AS(ChiSample(2.0, 1.0, 8), LambdaTooSmall);
}

TEST_CASE("chi identities on random pairs", "[chi][property]") {
    const double L = 10.0;
    const int cells = 1024;
    const double dl = 2.0 * L / cells;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-9.0, 9.0);
    const Expr one = Expr::parse("1");
    const Expr id = Expr::parse("lambda");
    const Expr quad = Expr::parse("3*lambda^2");
    for (int n = 0; n < 200; ++n) {
        const double v = u(rng);
        const double w = u(rng);
        // int chi(.; v) = v
        CHECK(std::fabs(chi_integral(one, v, L, cells) - v) <= dl);
        // int psi' chi(.; v) = psi(v) - psi(0)
        CHECK(std::fabs(chi_integral(id, v, L, cells) - 0.5 * v * v) <= dl * std::fabs(v) + 1e-12);
        CHECK(std::fabs(chi_integral(quad, v, L, cells) - v * v * v) <= 3.0 * dl * v * v + dl * dl * std::fabs(v));
        // int |chi(v) - chi(w)| = |v - w|
        CHECK(std::fabs(chi_distance(v, w, L, cells) - std::fabs(v - w)) <= 2.0 * dl);
        // |chi(v) - chi(w)| = (chi(v) - chi(w)) sgn(v - w), pointwise and exact
        for (int k = 0; k < 16; ++k) {
            const double lam = u(rng);
            const int diff = chi(lam, v) - chi(lam, w);
            const int sg = v > w ? 1 : v < w ? -1 : 0;
            CHECK(std::abs(diff) == diff * sg);
        }
    }
}

TEST_CASE("chi quadrature errors", "[chi]") {
    CHECK_THROWS_AS(chi_integral(Expr::parse("1"), 3.0, 2.0), LambdaTooSmall);
    CHECK_THROWS_AS(chi_integral(Expr::parse("1"), 1.0, 2.0, 32), DomainError);
    CHECK_THROWS_AS(chi_distance(1.0, 3.0, 2.0), LambdaTooSmall);
}

TEST_CASE("kinetic impulse residual", "[chi]") {
    Grid g;
    g.nx = 4;
    g.ns = 4;
    Field um(g), up(g);
    for (std::size_t i = 0; i < um.values.size(); ++i) um[i] = 0.1 * double(i) - 0.7;

    SECTION("zero source") {
        up = um;
        const double dl = 2.0 * 2.0 / 1024;
        CHECK(kinetic_impulse_residual(um, up, Expr::parse("0"), 2.0) <= 2.0 * dl);
    }
    SECTION("constant shift") {
        for (std::size_t i = 0; i < um.values.size(); ++i) up[i] = um[i] + 0.3;
        const double dl = 2.0 * 2.0 / 1024;
        CHECK(kinetic_impulse_residual(um, up, Expr::parse("0.3"), 2.0) <= 2.0 * dl);
    }
    SECTION("lambda-dependent map") {
        const Expr beta = Expr::parse("0.1*sin(lambda)");
        for (std::size_t i = 0; i < um.values.size(); ++i) up[i] = um[i] + 0.1 * std::sin(um[i]);
        const double dl = 2.0 * 2.0 / 1024;
        CHECK(kinetic_impulse_residual(um, up, beta, 2.0) <= 3.0 * dl * 1.1);
    }
    SECTION("a wrong jump is detected") {
        for (std::size_t i = 0; i < um.values.size(); ++i) up[i] = um[i] + 0.5;
        CHECK(kinetic_impulse_residual(um, up, Expr::parse("0"), 2.0) > 0.4);
    }
    SECTION("mesh mismatch") {
        Grid h = g;
        h.ns = 5;
        CHECK_THROWS_AS(kinetic_impulse_residual(um, Field(h), Expr::parse("0"), 2.0), GridMismatch);
    }
}
