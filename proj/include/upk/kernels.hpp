#pragma once

#include <functional>

#include "upk/expr.hpp"

namespace upk {

/// The classical bump mollifier on [-1, 1]:
///   omega(t) = exp(-1 / (1 - t^2)) / C   for |t| < 1, 0 otherwise,
/// with C = integral of exp(-1/(1-t^2)) over (-1, 1), so that omega integrates to one.
class Mollifier {
public:
    /// C, computed once by adaptive Simpson quadrature to 1e-12 and cached.
    static double normalization();
    double operator()(double t) const;
    /// Sup norm on [-1, 1], attained at t = 0.
    double sup() const;
};

double omega(double t);

/// One-sided delayed kernel K(t, tau) = 1[t <= tau] (2/gamma) omega((t - tau)/gamma).
/// Supported on [tau - gamma, tau]; tends to the left Dirac mass at tau as gamma -> 0.
class DelayedKernel {
public:
    /// Throws NonPositiveGamma when gamma <= 0.
    DelayedKernel(double tau, double gamma);

    double operator()(double t) const;
    double tau() const { return tau_; }
    double gamma() const { return gamma_; }
    double sup() const;

private:
    double tau_;
    double gamma_;
};

double k_gamma(double t, double tau, double gamma);

/// Integral of K over [0, horizon] by the adaptive rule (tolerance 1e-13).
double kernel_mass(double tau, double gamma, double horizon);

/// Integral of K over [0, horizon] by the midpoint rule on `cells` uniform t-cells;
/// this is the rule the solver uses for its source term.
double kernel_mass_midpoint(double tau, double gamma, double horizon, int cells);

/// Integral of phi(t) K(t, tau) dt, adaptive.
double kernel_moment(const std::function<double(double)>& phi, double tau, double gamma);

/// Box over which source and data functions are sampled: Omega = (0, L)^dim, s in [0, S].
struct SampleBox {
    int dim = 1;
    double length = 1.0;
    double horizon_s = 1.0;
};

/// Linear and constant coefficients of the growth bound lambda Z <= c1 lambda^2 + c2
/// satisfied by the mollified source Z = K * beta.
struct SourceGrowth {
    double linear = 0.0;    // 2 gamma^-1 |omega|_C (b0 + |beta(.,.,0)|_C / 2)
    double constant = 0.0;  // gamma^-1 |omega|_C |beta(.,.,0)|_C
};

/// Estimate of sup |d beta / d lambda| on a 64^dim x 64 x 256 grid of (x, s, lambda),
/// lambda in [-(support + 1), support + 1]. A sampled estimate, not a bound.
double estimate_lambda_lipschitz(const Expr& beta, const SampleBox& box, double support);

/// sup |beta(x, s, 0)| on a dense (256 per axis) grid over the closed box.
double estimate_source_at_zero(const Expr& beta, const SampleBox& box);

/// Throws NonPositiveGamma when gamma <= 0.
SourceGrowth source_growth_constants(const Expr& beta, double gamma, double b0, const SampleBox& box);

}  // namespace upk
