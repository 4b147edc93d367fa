#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "upk/problem.hpp"
#include "upk/solver.hpp"

namespace upk {

/// Outcome of one numerical check. pass <=> measured <= bound (1 + tolerance) + slack.
struct VerificationReport {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    double slack = 0.0;
    bool pass = false;
    std::string context;  // spec digest, grid, gamma, eps
    std::uint64_t context_hash = 0;
    std::string note;

    static VerificationReport make(std::string name, double measured, double bound, double tolerance, double slack,
                                   std::string context);
    double margin() const { return bound * (1.0 + tolerance) + slack - measured; }
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

/// Text identifying a run: expressions, domain, grid, gamma and eps.
std::string describe(const ProblemSpec& spec, const Grid& grid, double gamma, double eps);

/// Sup-norm of every snapshot against the applicable maximum principle (slack 1e-10):
/// zero source: the data bound; mollified source: min{M(t'), M7(t')}; impulsive: M2 before tau and
/// M3 from tau on. Data norms carry the kNormInflation safety factor.
VerificationReport check_max_principle(const Trajectory& traj, const ProblemSpec& spec);

/// The bound applied by check_max_principle at time t (t >= tau_snapped counts as post-jump).
class MaxPrincipleBound {
public:
    MaxPrincipleBound(const ProblemSpec& spec, double tau_snapped);
    double operator()(double t) const;

private:
    ProblemSpec spec_;
    DataNorms norms_;
    double tau_;
    double c1_ = 0.0;
    double c2_ = 0.0;
    bool refined_ = false;
    ImpulsiveBounds impulsive_;
};

/// L1 distance between two runs at every snapshot against the stability estimate
/// (impulsive estimate for two impulsive runs), with 5% tolerance and slack
/// grid_constant (sqrt(dx) + sqrt(ds)). Throws GridMismatch unless both runs share grid and time step.
VerificationReport check_stability(const Trajectory& first, const Trajectory& second, const ProblemSpec& first_spec,
                                   const ProblemSpec& second_spec, double grid_constant = 0.0);

/// Smallest K such that the stability check passes on this pair with slack K (sqrt(dx) + sqrt(ds)).
double calibrate_grid_constant(const Trajectory& first, const Trajectory& second, const ProblemSpec& first_spec,
                               const ProblemSpec& second_spec);

/// E = |u(T)|^2 + int |grad_x u|^2 + eps int |d_s u|^2 (discrete, midpoint).
double energy(const Trajectory& traj);
/// max E / min E over the family must stay <= 3. Throws TooFewRuns for fewer than three runs.
VerificationReport check_energy(const std::vector<const Trajectory*>& runs);

/// Fixed bank of eight tensor-product bumps (1 - z^2)^3 in (x, s, t), in units of the domain.
struct TestBump {
    double cx, rx, cs, rs, ct, rt;
};
const std::vector<TestBump>& test_function_bank();
double bump_value(const TestBump& b, const ProblemSpec& spec, double x, double y, double s, double t);

/// Kruzhkov constants: nine values uniform over [-M7(T), M7(T)] (the run's M when M7 is undefined).
std::vector<double> kruzhkov_bank(const Trajectory& traj, const ProblemSpec& spec);

/// Weak entropy residual W[k][j] = -sum_n sum_cells phi_j r_k vol, r_k the per-step Kruzhkov cell
/// residual of the monotone scheme, by replaying the run from its first snapshot. W >= 0 up to rounding.
std::vector<std::vector<double>> weak_entropy_residuals(const Trajectory& traj, const ProblemSpec& spec,
                                                        const std::vector<double>& k_values);
/// min over (k, phi) of W >= -1e-8.
VerificationReport check_entropy_residual(const Trajectory& traj, const ProblemSpec& spec,
                                          const std::vector<double>& k_values);

/// Boundary entropy inequalities at s = 0 (<= tol) and s = S (>= -tol), tol = 5 (ds + dx), for every
/// snapshot, x-cell and k, with the sign of eta' smoothed by tanh(z / 1e-6).
VerificationReport check_bln(const Trajectory& traj, const ProblemSpec& spec, const std::vector<double>& k_values);

/// sup over snapshots and x-cells of |trace - data| at the given side.
double trace_gap(const Trajectory& traj, const ProblemSpec& spec, TraceSide side);

/// Two rows: "jump" (pointwise, slack 1e-14) and "jump_kinetic" (<= 3 dlambda (1 + b0) on [-M3, M3],
/// 1024 lambda-cells). Throws MissingTauTraces when the run has no tau fields.
std::vector<VerificationReport> check_jump(const Trajectory& traj, const ProblemSpec& spec);

struct GammaLimitResult {
    std::vector<double> gammas;
    std::vector<double> errors;  // e_gamma = |u_gamma - u_*|_{L1(G)}
    bool window_bitwise = true;  // u_gamma == u_* on every step with t <= tau - gamma - dt
    double dt = 0.0;
    VerificationReport report;
};
/// Marches the impulsive problem and one mollified problem per gamma in lockstep on a common
/// time step and bound. gammas must be strictly decreasing within (0, gamma0/2] (GammaOutOfRange).
/// Passes iff the window comparison is bitwise, e_{i+1} < 1.05 e_i and e_min <= 0.5 e_max
/// (or every e <= 1e-12).
GammaLimitResult check_gamma_limit(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& gammas,
                                   const RunOptions& opts = {});

struct ViscosityLimitResult {
    std::vector<double> epsilons;
    std::vector<double> successive;  // |u_{eps_{i+1}} - u_{eps_i}|_{L1(G)}
    std::vector<double> to_entropy;  // |u_{eps_i} - u_0|_{L1(G)}
    double dt = 0.0;
    VerificationReport report;
};
/// eps-Cauchy check: epsilons strictly decreasing; passes iff the successive distances decrease.
ViscosityLimitResult check_viscosity_limit(const ProblemSpec& spec, const Grid& grid,
                                           const std::vector<double>& epsilons, const RunOptions& opts = {});

struct GenuineNonlinearityResult {
    std::vector<double> deltas;
    std::vector<std::vector<double>> mu;  // mu[delta][direction]
    std::vector<double> worst;            // max over directions, per delta
    VerificationReport report;
};
/// mu(delta) = meas{lambda in [-L, L] : |xi1 + a'(lambda) xi2| < delta} on a 4096-cell grid for
/// n_dirs uniform directions plus the critical ones (-a'(lambda_j), 1)/norm and (0, 1).
/// Passes iff max over directions of mu(delta_min) <= 10 delta_min L.
GenuineNonlinearityResult validate_genuine_nonlinearity(const Expr& a, double half_width, int n_dirs,
                                                        const std::vector<double>& deltas);

}  // namespace upk
