#include "upk/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "upk/errors.hpp"
#include "upk/quadrature.hpp"

namespace upk {

namespace {

double raw_bump(double t) {
    const double q = 1.0 - t * t;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

void require_positive_gamma(double gamma) {
    if (!(gamma > 0.0)) throw NonPositiveGamma("delay width gamma must be > 0, got " + std::to_string(gamma));
}

// Calls f(x..., s) over a uniform closed grid with `n` points per x-axis and `ns` along s.
template <class F>
void for_each_sample(const SampleBox& box, int n, int ns, F&& f) {
    auto coord = [](int i, int count, double extent) { return count <= 1 ? 0.0 : extent * i / (count - 1); };
    if (box.dim == 1) {
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < ns; ++k) f(coord(i, n, box.length), 0.0, coord(k, ns, box.horizon_s));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < ns; ++k)
                    f(coord(i, n, box.length), coord(j, n, box.length), coord(k, ns, box.horizon_s));
    }
}

}  // namespace

double Mollifier::normalization() {
    static const double c = quad::adaptive_simpson(raw_bump, -1.0, 1.0, 1e-12, 32);
    return c;
}

double Mollifier::operator()(double t) const { return raw_bump(t) / normalization(); }

double Mollifier::sup() const { return (*this)(0.0); }

double omega(double t) { return Mollifier{}(t); }

DelayedKernel::DelayedKernel(double tau, double gamma) : tau_(tau), gamma_(gamma) { require_positive_gamma(gamma); }

double DelayedKernel::operator()(double t) const {
    if (t > tau_) return 0.0;
    return 2.0 / gamma_ * omega((t - tau_) / gamma_);
}

double DelayedKernel::sup() const { return 2.0 / gamma_ * Mollifier{}.sup(); }

double k_gamma(double t, double tau, double gamma) { return DelayedKernel(tau, gamma)(t); }

double kernel_mass(double tau, double gamma, double horizon) {
    const DelayedKernel k(tau, gamma);
    const double lo = std::max(0.0, tau - gamma);
    const double hi = std::min(horizon, tau);
    return quad::adaptive_simpson([&](double t) { return k(t); }, lo, hi, 1e-13, 32);
}

double kernel_mass_midpoint(double tau, double gamma, double horizon, int cells) {
    const DelayedKernel k(tau, gamma);
    const double h = horizon / cells;
    double total = 0.0;
    for (int n = 0; n < cells; ++n) total += h * k((n + 0.5) * h);
    return total;
}

double kernel_moment(const std::function<double(double)>& phi, double tau, double gamma) {
    const DelayedKernel k(tau, gamma);
    return quad::adaptive_simpson([&](double t) { return phi(t) * k(t); }, tau - gamma, tau, 1e-13, 32);
}

double estimate_lambda_lipschitz(const Expr& beta, const SampleBox& box, double support) {
    const double lam_max = support + 1.0;
    constexpr int kLambda = 256;
    double best = 0.0;
    for_each_sample(box, 64, 64, [&](double x, double y, double s) {
        Bindings b;
        b.x(x).y(y).s(s);
        for (int l = 0; l < kLambda; ++l) {
            b.lambda(-lam_max + 2.0 * lam_max * l / (kLambda - 1));
            best = std::max(best, std::fabs(beta.eval_dual(b, Var::Lambda).deriv));
        }
    });
    return best;
}

double estimate_source_at_zero(const Expr& beta, const SampleBox& box) {
    double best = 0.0;
    const int n = box.dim == 1 ? 256 : 64;
    for_each_sample(box, n, 256, [&](double x, double y, double s) {
        Bindings b;
        b.x(x).y(y).s(s).lambda(0.0);
        best = std::max(best, std::fabs(beta.eval(b)));
    });
    return best;
}

SourceGrowth source_growth_constants(const Expr& beta, double gamma, double b0, const SampleBox& box) {
    require_positive_gamma(gamma);
    const double w = Mollifier{}.sup();
    const double at_zero = estimate_source_at_zero(beta, box);
    return {2.0 / gamma * w * (b0 + 0.5 * at_zero), w * at_zero / gamma};
}

}  // namespace upk
