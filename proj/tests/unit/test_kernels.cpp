#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "upk/errors.hpp"
#include "upk/kernels.hpp"

using namespace upk;
using Catch::Approx;

namespace {

// Composite Gauss-Legendre (5 points) on n panels; independent of the library's Simpson rule.
template <class F>
double gauss(F&& f, double a, double b, int n = 4000) {
    static const double xg[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    static const double wg[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                 0.2369268850561891};
    const double h = (b - a) / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double m = a + (i + 0.5) * h;
        for (int j = 0; j < 5; ++j) total += wg[j] * f(m + 0.5 * h * xg[j]);
    }
    return total * 0.5 * h;
}

double raw(double t) { return std::fabs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

}  // namespace

TEST_CASE("mollifier normalisation", "[kernels]") {
    const double c = gauss(raw, -1.0, 1.0);
    CHECK(Mollifier::normalization() == Approx(c).epsilon(1e-11));
    CHECK(Mollifier::normalization() == Approx(0.4439938161680786).epsilon(1e-12));
    // omega(0) = e^-1 / C; 1/C is the constant 2.2522 quoted for the kernel.
    CHECK(Mollifier{}.sup() == Approx(std::exp(-1.0) / c).epsilon(1e-11));
    CHECK(1.0 / Mollifier::normalization() == Approx(2.2522).margin(1e-4));
    CHECK(gauss(omega, -1.0, 1.0) == Approx(1.0).epsilon(1e-11));
}

TEST_CASE("mollifier shape", "[kernels]") {
    CHECK(omega(1.0) == 0.0);
    CHECK(omega(-1.0) == 0.0);
    CHECK(omega(1.5) == 0.0);
    for (double t : {0.1, 0.3, 0.6, 0.9}) {
        CHECK(omega(t) == omega(-t));
        CHECK(omega(t) < omega(0.0));
        CHECK(omega(t) > 0.0);
    }
}

TEST_CASE("delayed kernel support and height", "[kernels]") {
    const DelayedKernel k(0.5, 0.1);
    CHECK(k(0.5 + 1e-12) == 0.0);
    CHECK(k(0.39) == 0.0);
    CHECK(k(0.45) == Approx(2.0 / 0.1 * omega(-0.5)));
    CHECK(k.sup() == Approx(20.0 * omega(0.0)));
    CHECK(k_gamma(0.45, 0.5, 0.1) == k(0.45));
    CHECK_THROWS_AS(DelayedKernel(0.5, 0.0), NonPositiveGamma);
    CHECK_THROWS_AS(DelayedKernel(0.5, -0.1), NonPositiveGamma);
}

TEST_CASE("kernel carries unit mass", "[kernels]") {
    for (double g : {0.2, 0.1, 0.05, 0.025}) {
        INFO("gamma = " << g);
        // One-sided kernel: (2/gamma) int_{-1}^{0} omega = 1.
        CHECK(std::fabs(kernel_mass(0.5, g, 1.0) - 1.0) <= 1e-8);
        CHECK(gauss([&](double t) { return k_gamma(t, 0.5, g); }, 0.5 - g, 0.5) == Approx(1.0).epsilon(1e-10));
    }
    // Midpoint rule on a fine grid converges to the same mass.
    CHECK(kernel_mass_midpoint(0.5, 0.1, 1.0, 4096) == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Dirac limit from the left", "[kernels]") {
    const double tau = 0.5;
    const auto phi = [](double t) { return t * t; };
    // Oracle: int phi K = tau^2 + 2 tau gamma m1 + gamma^2 m2 with one-sided moments of 2 omega.
    const double m1 = gauss([](double z) { return 2.0 * z * omega(z); }, -1.0, 0.0);
    const double m2 = gauss([](double z) { return 2.0 * z * z * omega(z); }, -1.0, 0.0);
    double prev = 1e300;
    for (double g : {0.2, 0.1, 0.05, 0.025}) {
        const double moment = kernel_moment(phi, tau, g);
        CHECK(moment == Approx(tau * tau + 2.0 * tau * g * m1 + g * g * m2).epsilon(1e-10));
        const double err = std::fabs(moment - phi(tau));
        CHECK(err < prev);
        prev = err;
    }
    CHECK(m1 < 0.0);  // mass sits before tau
}

TEST_CASE("growth constants", "[kernels]") {
    const SampleBox box{1, 2.0, 1.0};
    // beta(x, s, 0) peaks at 0.5; d beta / d lambda = 0.5 bump so b0 = 0.5.
    const Expr beta = Expr::parse("0.5*max(0, 1 - ((x - 1)/0.5)^2)^2 * max(0, 1 - ((s - 0.5)/0.25)^2)^2 * (1 + lambda)");
    const double b0 = estimate_lambda_lipschitz(beta, box, 1.0);
    CHECK(b0 == Approx(0.5).margin(5e-3));
    CHECK(estimate_source_at_zero(beta, box) == Approx(0.5).margin(1e-3));
    const SourceGrowth g = source_growth_constants(beta, 0.1, 0.5, box);
    const double w0 = omega(0.0);
    CHECK(g.linear == Approx(2.0 / 0.1 * w0 * (0.5 + 0.25)).epsilon(1e-3));
    CHECK(g.constant == Approx(w0 * 0.5 / 0.1).epsilon(1e-3));
    CHECK_THROWS_AS(source_growth_constants(beta, 0.0, 0.5, box), NonPositiveGamma);
}
