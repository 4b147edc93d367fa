#include "upk/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "upk/errors.hpp"

namespace upk {

namespace {

constexpr double kCollar = 0.05;
constexpr double kZeroTol = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Bindings full_bindings(double x, double y, double s, double t, double lambda) {
    Bindings b;
    b.x(x).y(y).s(s).t(t).lambda(lambda);
    return b;
}

double node(int i, int count, double extent) { return count <= 1 ? 0.0 : extent * i / (count - 1); }

int x_samples(int dim) { return dim == 1 ? 256 : 64; }

// Calls f(x, y) over a closed uniform grid of Omega.
template <class F>
void for_each_x(int dim, double length, int n, F&& f) {
    for (int i = 0; i < n; ++i) {
        const double x = node(i, n, length);
        if (dim == 1) {
            f(x, 0.0);
        } else {
            for (int j = 0; j < n; ++j) f(x, node(j, n, length));
        }
    }
}

bool in_collar(double v, double extent) { return v <= kCollar * extent || v >= (1.0 - kCollar) * extent; }

// Sup of |f(x, y, s, lambda)| over Xi^1 x [-range, range].
template <class F>
double sample_sup(const SampleBox& box, double range, F&& f) {
    const int nx = box.dim == 1 ? 64 : 32;
    constexpr int ns = 64;
    constexpr int nl = 257;
    double best = 0.0;
    for_each_x(box.dim, box.length, nx, [&](double x, double y) {
        for (int k = 0; k < ns; ++k) {
            const double s = node(k, ns, box.horizon_s);
            for (int l = 0; l < nl; ++l) {
                const double lam = range * (2.0 * l / (nl - 1) - 1.0);
                best = std::max(best, std::fabs(f(x, y, s, lam)));
            }
        }
    });
    return best;
}

void check_flux_origin(const Expr& f, const std::string& name) {
    const double v = f.eval(Bindings{}.lambda(0.0));
    if (std::fabs(v) > kZeroTol) throw ValidationError("flux " + name + ": " + name + "(0) = " + fmt(v) + " != 0");
}

void check_initial_collar(const ProblemSpec& spec) {
    const int n = x_samples(spec.dim);
    for_each_x(spec.dim, spec.length, n, [&](double x, double y) {
        const bool x_edge = in_collar(x, spec.length) || (spec.dim == 2 && in_collar(y, spec.length));
        for (int k = 0; k < 256; ++k) {
            const double s = node(k, 256, spec.horizon_s);
            if (!x_edge && !in_collar(s, spec.horizon_s)) continue;
            const double v = spec.initial_data.eval(full_bindings(x, y, s, 0.0, 0.0));
            if (std::fabs(v) >= kZeroTol)
                throw ValidationError("data u0_1 must vanish near the boundary of Omega x (0, S): u0_1(" + fmt(x) +
                                      ", " + fmt(s) + ") = " + fmt(v));
        }
    });
}

void check_boundary_collar(const Expr& data, const std::string& name, const ProblemSpec& spec) {
    const int n = x_samples(spec.dim);
    for_each_x(spec.dim, spec.length, n, [&](double x, double y) {
        const bool x_edge = in_collar(x, spec.length) || (spec.dim == 2 && in_collar(y, spec.length));
        for (int k = 0; k < 256; ++k) {
            const double t = node(k, 256, spec.horizon_t);
            if (!x_edge && !in_collar(t, spec.horizon_t)) continue;
            const double v = data.eval(full_bindings(x, y, 0.0, t, 0.0));
            if (std::fabs(v) >= kZeroTol)
                throw ValidationError("data " + name + " must vanish near the boundary of Omega x (0, T): " + name +
                                      "(" + fmt(x) + ", " + fmt(t) + ") = " + fmt(v));
        }
    });
}

void check_source(const ProblemSpec& spec) {
    const Expr& beta = *spec.impulse;
    if (!(spec.impulse_support > 0.0))
        throw ValidationError("source support bound b1 must be > 0, got " + fmt(spec.impulse_support));
    const double b1 = spec.impulse_support;
    const int n = spec.dim == 1 ? 32 : 16;
    const double lambdas[] = {-b1 - 2.0, -b1 - 1.0, -b1 - 0.25, -b1 - 1e-3, b1 + 1e-3, b1 + 0.25, b1 + 1.0, b1 + 2.0};
    const double inside[] = {-b1, -0.5 * b1, 0.0, 0.5 * b1, b1};
    for_each_x(spec.dim, spec.length, n, [&](double x, double y) {
        const bool x_edge = in_collar(x, spec.length) || (spec.dim == 2 && in_collar(y, spec.length));
        for (int k = 0; k < 64; ++k) {
            const double s = node(k, 64, spec.horizon_s);
            for (double lam : lambdas) {
                const double v = beta.eval(full_bindings(x, y, s, 0.0, lam));
                if (std::fabs(v) >= kZeroTol)
                    throw ValidationError("source beta must vanish for |lambda| > b1 = " + fmt(b1) + ": beta(" +
                                          fmt(x) + ", " + fmt(s) + ", " + fmt(lam) + ") = " + fmt(v));
            }
            if (!x_edge && !in_collar(s, spec.horizon_s)) continue;
            for (double lam : inside) {
                const double v = beta.eval(full_bindings(x, y, s, 0.0, lam));
                if (std::fabs(v) >= kZeroTol)
                    throw ValidationError("source beta must vanish near the boundary of Omega x (0, S): beta(" +
                                          fmt(x) + ", " + fmt(s) + ", " + fmt(lam) + ") = " + fmt(v));
            }
        }
    });
}

}  // namespace

double ProblemSpec::gamma0() const { return std::min(impulse_time, horizon_t - impulse_time); }

void validate(const ProblemSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2) throw ValidationError("dimension d must be 1 or 2, got " + std::to_string(spec.dim));
    if (!(spec.length > 0.0) || !(spec.horizon_t > 0.0) || !(spec.horizon_s > 0.0))
        throw ValidationError("domain extents L, T, S must be > 0");
    if (spec.x_flux.size() != std::size_t(spec.dim))
        throw ValidationError("flux phi: expected " + std::to_string(spec.dim) + " components, got " +
                              std::to_string(spec.x_flux.size()));
    check_flux_origin(spec.s_flux, "a");
    for (std::size_t i = 0; i < spec.x_flux.size(); ++i) check_flux_origin(spec.x_flux[i], "phi_" + std::to_string(i + 1));
    if (!(spec.viscosity >= 0.0)) throw ValidationError("viscosity epsilon must be >= 0, got " + fmt(spec.viscosity));
    if (!(spec.delay_width >= 0.0)) throw ValidationError("delay width gamma must be >= 0, got " + fmt(spec.delay_width));
    if (spec.has_source() || spec.delay_width > 0.0) {
        if (!(spec.impulse_time > 0.0 && spec.impulse_time < spec.horizon_t))
            throw ValidationError("impulse time tau must lie in (0, T), got " + fmt(spec.impulse_time));
        if (spec.delay_width > 0.5 * spec.gamma0() * (1.0 + 1e-12))
            throw ValidationError("delay width gamma = " + fmt(spec.delay_width) +
                                  " exceeds gamma0 / 2 = " + fmt(0.5 * spec.gamma0()) +
                                  " where gamma0 = min{tau, T - tau}");
    }
    check_initial_collar(spec);
    check_boundary_collar(spec.s0_data, "u0_2", spec);
    check_boundary_collar(spec.sS_data, "uS_2", spec);
    if (spec.has_source()) check_source(spec);
}

DataNorms::DataNorms(const ProblemSpec& spec) : horizon_t_(spec.horizon_t) {
    const int n = x_samples(spec.dim);
    for_each_x(spec.dim, spec.length, n, [&](double x, double y) {
        for (int k = 0; k < 256; ++k) {
            const double s = node(k, 256, spec.horizon_s);
            initial_ = std::max(initial_, std::fabs(spec.initial_data.eval(full_bindings(x, y, s, 0.0, 0.0))));
        }
    });
    constexpr int nt = 257;
    s0_profile_.assign(nt, 0.0);
    sS_profile_.assign(nt, 0.0);
    for (int k = 0; k < nt; ++k) {
        const double t = node(k, nt, spec.horizon_t);
        for_each_x(spec.dim, spec.length, n, [&](double x, double y) {
            const Bindings b = full_bindings(x, y, 0.0, t, 0.0);
            s0_profile_[std::size_t(k)] = std::max(s0_profile_[std::size_t(k)], std::fabs(spec.s0_data.eval(b)));
            sS_profile_[std::size_t(k)] = std::max(sS_profile_[std::size_t(k)], std::fabs(spec.sS_data.eval(b)));
        });
    }
}

double DataNorms::range_max(const std::vector<double>& table, double t0, double t1) const {
    const int last = int(table.size()) - 1;
    const double h = horizon_t_ / last;
    // Include the samples bracketing the interval.
    const int lo = std::clamp(int(std::floor(std::max(t0, 0.0) / h)), 0, last);
    const int hi = std::clamp(int(std::ceil(std::min(t1, horizon_t_) / h)), 0, last);
    double m = 0.0;
    for (int k = lo; k <= hi; ++k) m = std::max(m, table[std::size_t(k)]);
    return m;
}

double DataNorms::s0(double t0, double t1) const { return range_max(s0_profile_, t0, t1); }
double DataNorms::sS(double t0, double t1) const { return range_max(sS_profile_, t0, t1); }
double DataNorms::all(double t_prime) const { return std::max({initial_, s0(0.0, t_prime), sS(0.0, t_prime)}); }
double DataNorms::all() const { return all(horizon_t_); }

double max_principle_value(double data_bound, double t_prime, double c1, double c2) {
    if (c2 <= 0.0) return std::exp(c1 * t_prime) * data_bound;
    // Work with the logarithm of the objective; exp(xi t') overflows long before the window ends.
    const auto f = [&](double xi) { return xi * t_prime + std::max(std::log(data_bound), 0.5 * std::log(c2 / (xi - c1))); };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = c1 + 1e-9;
    double hi = c1 + 50.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    const double best = std::min({f(0.5 * (lo + hi)), f(c1 + 1e-9), f(c1 + 50.0)});
    return std::exp(best);
}

double max_principle_bound(const ProblemSpec&, const DataNorms& norms, double t_prime, double c1, double c2) {
    return max_principle_value(norms.all(t_prime), t_prime, c1, c2);
}

double max_principle_bound(const ProblemSpec& spec, double t_prime, double c1, double c2) {
    return max_principle_bound(spec, DataNorms(spec), t_prime, c1, c2);
}

double refined_exponent(double initial_norm, double support, double tau, double gamma0) {
    if (support <= initial_norm - 1.0) return 0.0;
    if (initial_norm == 0.0)
        throw ZeroInitialData("refined maximum principle: |u0_1| = 0 with b1 > -1 leaves the exponent undefined");
    return 2.0 / (2.0 * tau - gamma0) * std::log((support + 1.0) / initial_norm);
}

double refined_max_bound(const ProblemSpec& spec, const DataNorms& norms, double t_prime) {
    const double b1 = spec.has_source() ? spec.impulse_support : 0.0;
    const double xi = refined_exponent(norms.initial(), b1, spec.impulse_time, spec.gamma0());
    return std::exp(xi * t_prime) * norms.all();
}

double refined_max_bound(const ProblemSpec& spec, double t_prime) { return refined_max_bound(spec, DataNorms(spec), t_prime); }

double growth_exponent(const ProblemSpec& spec, double t, double dt, double lambda_lipschitz) {
    if (!spec.has_source() || spec.is_impulsive() || lambda_lipschitz == 0.0) return 0.0;
    const DelayedKernel k(spec.impulse_time, spec.delay_width);
    double g = 0.0;
    for (int n = 0; n * dt < t; ++n) {
        const double w = std::min(dt, t - n * dt);
        g += w * k(n * dt + 0.5 * w) * lambda_lipschitz;
    }
    return g;
}

double max_abs_derivative(const Expr& f, double range) {
    constexpr int n = 4097;
    double best = 0.0;
    Bindings b;
    for (int i = 0; i < n; ++i) {
        b.lambda(range * (2.0 * i / (n - 1) - 1.0));
        best = std::max(best, std::fabs(f.eval_dual(b, Var::Lambda).deriv));
    }
    return best;
}

double stability_rhs(const ProblemSpec& spec, const StabilityInputs& in) {
    const bool source = spec.has_source() && !spec.is_impulsive() && in.lambda_lipschitz > 0.0;
    const DelayedKernel k(spec.impulse_time, source ? spec.delay_width : 1.0);
    const double dt = in.s0_distance.dt > 0.0 ? in.s0_distance.dt : in.sS_distance.dt;
    const auto at = [](const TimeSeries& s, int n) {
        return n < int(s.values.size()) ? s.values[std::size_t(n)] : 0.0;
    };
    double g = 0.0;
    double boundary = 0.0;
    if (dt > 0.0) {
        for (int n = 0; n * dt < in.t; ++n) {
            const double w = std::min(dt, in.t - n * dt);
            const double rate = source ? k(n * dt + 0.5 * w) * in.lambda_lipschitz : 0.0;
            boundary += w * std::exp(-(g + 0.5 * w * rate)) * (at(in.s0_distance, n) + at(in.sS_distance, n));
            g += w * rate;
        }
    } else if (source) {
        g = growth_exponent(spec, in.t, spec.horizon_t / 4096.0, in.lambda_lipschitz);
    }
    const double amax = boundary > 0.0 ? max_abs_derivative(spec.s_flux, in.range) : 0.0;
    return std::exp(g) * (in.initial_distance + amax * boundary);
}

double source_sup(const Expr& beta, const SampleBox& box, double range) {
    return sample_sup(box, range, [&](double x, double y, double s, double lam) {
        return beta.eval(full_bindings(x, y, s, 0.0, lam));
    });
}

ImpulsiveBounds impulsive_bounds(const ProblemSpec& spec, const DataNorms& norms) {
    const double tau = spec.impulse_time;
    const double T = spec.horizon_t;
    ImpulsiveBounds out;
    out.pre = std::max({norms.initial(), norms.s0(0.0, tau), norms.sS(0.0, tau)});
    const double jump = spec.has_source() ? source_sup(*spec.impulse, spec.box(), out.pre) : 0.0;
    out.post = std::max({out.pre + jump, norms.s0(tau, T), norms.sS(tau, T)});
    return out;
}

ImpulsiveBounds impulsive_bounds(const ProblemSpec& spec) { return impulsive_bounds(spec, DataNorms(spec)); }

ImpulsiveStabilityBound::ImpulsiveStabilityBound(const ProblemSpec& first, const ProblemSpec& second, double tau)
    : tau_(tau >= 0.0 ? tau : first.impulse_time) {
    const DataNorms n1(first);
    const DataNorms n2(second);
    const double T = first.horizon_t;
    const SampleBox box = first.box();
    const double m5 = std::max({n1.initial(), n1.s0(0.0, tau_), n1.sS(0.0, tau_), n2.initial(), n2.s0(0.0, tau_),
                                n2.sS(0.0, tau_)});
    const double sup1 = first.has_source() ? source_sup(*first.impulse, box, m5) : 0.0;
    const double sup2 = second.has_source() ? source_sup(*second.impulse, box, m5) : 0.0;
    const double m4 = std::max({m5 + sup1, n1.s0(tau_, T), n1.sS(tau_, T), m5 + sup2, n2.s0(tau_, T), n2.sS(tau_, T)});

    const auto beta_at = [](const ProblemSpec& p, const Bindings& b) { return p.has_source() ? p.impulse->eval(b) : 0.0; };
    beta_diff_ = sample_sup(box, m5, [&](double x, double y, double s, double lam) {
        const Bindings b = full_bindings(x, y, s, 0.0, lam);
        return beta_at(first, b) - beta_at(second, b);
    });
    beta_lip_ = first.has_source() ? sample_sup(box, m5, [&](double x, double y, double s, double lam) {
        return first.impulse->eval_dual(full_bindings(x, y, s, 0.0, lam), Var::Lambda).deriv;
    })
                                   : 0.0;
    weight_ = first.horizon_s * (first.dim == 1 ? first.length : first.length * first.length);
    a_prime_m4_ = max_abs_derivative(first.s_flux, m4);
    a_prime_m5_ = max_abs_derivative(first.s_flux, m5);
}

double ImpulsiveStabilityBound::operator()(const ImpulsiveStabilityInputs& in) const {
    double rhs = in.initial_distance + a_prime_m4_ * (in.s0_distance_to_t + in.sS_distance_to_t);
    if (in.t < tau_) return rhs;
    rhs += weight_ * beta_diff_;
    rhs += beta_lip_ * (in.initial_distance + a_prime_m5_ * (in.s0_distance_to_tau + in.sS_distance_to_tau));
    return rhs;
}

double impulsive_stability_rhs(const ProblemSpec& first, const ProblemSpec& second, const ImpulsiveStabilityInputs& in) {
    return ImpulsiveStabilityBound(first, second, in.tau)(in);
}

double predicted_sup_bound(const ProblemSpec& spec) {
    const DataNorms norms(spec);
    if (!spec.has_source()) return norms.all() * kNormInflation;
    if (spec.is_impulsive()) return impulsive_bounds(spec, norms).post * kNormInflation;
    const SampleBox box = spec.box();
    const double b0 = estimate_lambda_lipschitz(*spec.impulse, box, spec.impulse_support);
    const SourceGrowth g = source_growth_constants(*spec.impulse, spec.delay_width, b0, box);
    double bound = max_principle_bound(spec, norms, spec.horizon_t, g.linear, g.constant);
    try {
        bound = std::min(bound, refined_max_bound(spec, norms, spec.horizon_t));
    } catch (const ZeroInitialData&) {
    }
    return bound * kNormInflation;
}

std::string to_string(SolveMode m) {
    switch (m) {
        case SolveMode::Regularized: return "regularized";
        case SolveMode::Entropy: return "entropy";
        case SolveMode::Impulsive: return "impulsive";
    }
    return "unknown";
}

std::string to_string(FluxKind k) { return k == FluxKind::LaxFriedrichs ? "lf" : "eo"; }

}  // namespace upk
