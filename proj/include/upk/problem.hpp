#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upk/expr.hpp"
#include "upk/field.hpp"
#include "upk/kernels.hpp"

namespace upk {

/// Full definition of a boundary value problem
///
///   u_t + a(u)_s + div_x phi(u) = Lap_x u + eps u_ss + K(t, tau) beta(x, s, u)
///
/// on (0, L)^d x (0, T) x (0, S), with u = initial_data at t = 0, the s-boundary data
/// s0_data / sS_data (possibly unattained when eps = 0) and u = 0 on the lateral boundary.
/// A zero delay width with a source present selects the impulsive problem, where the source
/// is replaced by the jump u(tau+0) = u(tau-0) + beta(x, s, u(tau-0)).
struct ProblemSpec {
    int dim = 1;
    double length = 1.0;     // L
    double horizon_t = 1.0;  // T
    double horizon_s = 1.0;  // S

    Expr s_flux;               // a(lambda)
    std::vector<Expr> x_flux;  // phi_i(lambda), one per spatial axis

    std::optional<Expr> impulse;   // beta(x, s, lambda)
    double impulse_time = 0.5;     // tau
    double delay_width = 0.0;      // gamma; 0 with an impulse selects the impulsive problem
    double impulse_support = 0.0;  // b1: beta = 0 for |lambda| > b1
    double viscosity = 0.0;        // eps

    Expr initial_data;  // u0^(1)(x, s)
    Expr s0_data;       // u0^(2)(x, t), prescribed at s = 0
    Expr sS_data;       // uS^(2)(x, t), prescribed at s = S

    /// min{tau, T - tau}
    double gamma0() const;
    bool has_source() const { return impulse.has_value(); }
    bool is_impulsive() const { return impulse.has_value() && delay_width == 0.0; }
    SampleBox box() const { return {dim, length, horizon_s}; }
};

/// Checks every load-time invariant and throws ValidationError naming the first violated one:
/// a(0) = 0 and phi_i(0) = 0; data (and beta) vanish on a boundary collar of relative width
/// 0.05; beta = 0 for |lambda| > b1; 0 < tau < T; gamma <= gamma0 / 2.
void validate(const ProblemSpec& spec);

/// Sampled sup norms of the data. Every value is a dense-grid estimate (256 points per axis).
class DataNorms {
public:
    explicit DataNorms(const ProblemSpec& spec);

    double initial() const { return initial_; }
    /// sup over Omega x [t0, t1] of |u0^(2)| and |uS^(2)|.
    double s0(double t0, double t1) const;
    double sS(double t0, double t1) const;
    /// max of the three data norms with boundary data restricted to (0, t').
    double all(double t_prime) const;
    double all() const;

private:
    double range_max(const std::vector<double>& table, double t0, double t1) const;

    double horizon_t_;
    double initial_ = 0.0;
    std::vector<double> s0_profile_;  // sup over x at each sampled t
    std::vector<double> sS_profile_;
};

/// Multiplicative safety applied to sampled sup norms wherever they feed an asserted bound.
inline constexpr double kNormInflation = 1.01;

/// inf over xi > c1 of e^{xi t'} max{D, sqrt(c2 / (xi - c1))}, where D is the data bound.
/// Golden-section search on (c1 + 1e-9, c1 + 50], tolerance 1e-10; closed form when c2 = 0.
double max_principle_value(double data_bound, double t_prime, double c1, double c2);

/// The maximum principle bound M(t') for the mollified-source problem (sampled data norms).
double max_principle_bound(const ProblemSpec& spec, double t_prime, double c1, double c2);
double max_principle_bound(const ProblemSpec& spec, const DataNorms& norms, double t_prime, double c1, double c2);

/// Exponent xi_* of the refined bound: 0 if b1 <= |u0| - 1, else 2/(2 tau - gamma0) ln((b1+1)/|u0|).
/// Throws ZeroInitialData when |u0| = 0 and the logarithm is undefined.
double refined_exponent(double initial_norm, double support, double tau, double gamma0);

/// M7(t') = e^{xi_* t'} max{|u0^(1)|, |u0^(2)|, |uS^(2)|} (whole-horizon boundary norms).
double refined_max_bound(const ProblemSpec& spec, double t_prime);
double refined_max_bound(const ProblemSpec& spec, const DataNorms& norms, double t_prime);

/// A function of t sampled at the midpoints (n + 1/2) dt of a uniform t-grid.
struct TimeSeries {
    double dt = 0.0;
    std::vector<double> values;
};

/// Inputs of the L1 stability estimate for the mollified-source problem.
struct StabilityInputs {
    double t = 0.0;
    double initial_distance = 0.0;  // |u1,0 - u2,0|_{L1(Xi^1)}
    TimeSeries s0_distance;         // |u1,0^(2) - u2,0^(2)|_{L1(Omega)}(t')
    TimeSeries sS_distance;         // |u1,S^(2) - u2,S^(2)|_{L1(Omega)}(t')
    double lambda_lipschitz = 0.0;  // b0 >= sup |d_lambda beta|
    double range = 0.0;             // M1(t): a' is maximized over [-M1, M1]
};

/// Exponent G(t) = integral over (0, t) of sup |d_lambda Z|, by the midpoint t-rule with step dt.
double growth_exponent(const ProblemSpec& spec, double t, double dt, double lambda_lipschitz);

/// e^{G(t)} [ d_init + max|a'| int_0^t e^{-G(t')} (d_s0 + d_sS) dt' ].
double stability_rhs(const ProblemSpec& spec, const StabilityInputs& in);

/// sup |f'| over [-range, range] on 4097 sample points.
double max_abs_derivative(const Expr& f, double range);

struct ImpulsiveBounds {
    double pre = 0.0;   // M2
    double post = 0.0;  // M3
};

/// M2 = data bound on (0, tau); M3 = max{M2 + |beta|_{C(Xi^1 x [-M2, M2])}, post-tau boundary norms}.
ImpulsiveBounds impulsive_bounds(const ProblemSpec& spec);
ImpulsiveBounds impulsive_bounds(const ProblemSpec& spec, const DataNorms& norms);

/// sup |beta| over Xi^1 x [-range, range] (sampled).
double source_sup(const Expr& beta, const SampleBox& box, double range);

/// Right-hand side of the L1 stability estimate for two impulsive problems at time t.
struct ImpulsiveStabilityInputs {
    double t = 0.0;
    double initial_distance = 0.0;
    double s0_distance_to_t = 0.0;    // |u1,0^(2) - u2,0^(2)|_{L1(Omega x (0, t))}
    double sS_distance_to_t = 0.0;
    double s0_distance_to_tau = 0.0;  // same over (0, tau)
    double sS_distance_to_tau = 0.0;
    double tau = -1.0;  // impulse time as realised on the t-grid; negative selects the spec value
};
double impulsive_stability_rhs(const ProblemSpec& first, const ProblemSpec& second,
                               const ImpulsiveStabilityInputs& in);

/// The same estimate with the data-dependent constants (M4, M5, source norms) computed once.
class ImpulsiveStabilityBound {
public:
    ImpulsiveStabilityBound(const ProblemSpec& first, const ProblemSpec& second, double tau = -1.0);
    double operator()(const ImpulsiveStabilityInputs& in) const;

private:
    double tau_;
    double weight_;       // S meas(Omega)
    double beta_diff_;    // |beta1 - beta2| on Xi^1 x [-M5, M5]
    double beta_lip_;     // max |d_lambda beta1| on the same set
    double a_prime_m4_;   // |a'|_C[-M4, M4]
    double a_prime_m5_;
};

/// Predicted sup-norm of the solution over the whole run, used for the time step and
/// the flux tables: the tightest applicable maximum principle, inflated by kNormInflation.
double predicted_sup_bound(const ProblemSpec& spec);

/// One stored solver state.
struct Snapshot {
    int step = 0;
    Field field;
    double grad_x_sq = 0.0;  // running integral of |grad_x u|^2 over Xi^1 x (0, t)
    double grad_s_sq = 0.0;  // running integral of |d_s u|^2 over Xi^1 x (0, t)
};

enum class SolveMode { Regularized, Entropy, Impulsive };
enum class FluxKind { LaxFriedrichs, EngquistOsher };
enum class BoundaryMode { Physical, Periodic };

std::string to_string(SolveMode m);
std::string to_string(FluxKind k);

/// Time-indexed solver output with the traces the verifier needs.
struct Trajectory {
    Grid grid;  // dt and nt are those of the run
    SolveMode mode = SolveMode::Entropy;
    FluxKind flux = FluxKind::EngquistOsher;
    double gamma = 0.0;
    double epsilon = 0.0;
    double bound = 0.0;  // sup-norm bound M used for the step size and flux tables
    double cfl_safety = 0.9;
    double tau_snapped = 0.0;
    int tau_step = -1;
    int stride = 32;
    std::vector<Snapshot> snapshots;  // strictly increasing t
    std::optional<Field> tau_minus;
    std::optional<Field> tau_plus;

    bool crosses_tau() const { return tau_minus.has_value() && tau_plus.has_value(); }
};

}  // namespace upk
