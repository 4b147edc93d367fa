#pragma once

#include <memory>
#include <vector>

#include "upk/problem.hpp"
#include "upk/scheme.hpp"

namespace upk {

struct RunOptions {
    FluxKind flux = FluxKind::EngquistOsher;
    double cfl_safety = 0.9;
    int stride = 32;
    double dt = 0.0;     // > 0 overrides the CFL step (it is still rounded so that T is hit exactly)
    double bound = 0.0;  // > 0 overrides the predicted sup-norm bound M
    BoundaryMode boundary = BoundaryMode::Physical;
    bool x_diffusion = true;
    int jobs = 1;  // worker threads for runs marched in lockstep
};

/// Cell averages of u0_1 (midpoint values).
Field initial_field(const ProblemSpec& spec, const Grid& grid);

/// Time grid of a run: dt = T / Nt with Nt = ceil(T / dt_cfl), tau snapped to the nearest step.
struct TimeGrid {
    double dt = 0.0;
    int nt = 0;
    int tau_step = -1;
};
TimeGrid make_time_grid(const ProblemSpec& spec, const Grid& grid, double M, const RunOptions& opts);

/// Step-by-step driver. One instance marches one problem; several can be advanced in lockstep.
/// SolveMode::Impulsive applies u(tau+0) = u(tau-0) + beta(x, s, u(tau-0)) after step tau_step.
class Marcher {
public:
    Marcher(const ProblemSpec& spec, const Grid& grid, SolveMode mode, const RunOptions& opts = {});

    bool done() const { return n_ >= time_.nt; }
    /// One time step (plus the jump when it lands on tau). Throws CflViolation when |u| exceeds M.
    void advance();
    const Field& state() const { return u_; }
    int step_index() const { return n_; }
    double time() const { return n_ * time_.dt; }
    const TimeGrid& time_grid() const { return time_; }
    double bound() const { return bound_; }
    const Stepper& stepper() const { return *stepper_; }
    Trajectory& trajectory() { return traj_; }

    /// Runs to T and hands over the trajectory.
    Trajectory run();

private:
    void record(bool force);

    ProblemSpec spec_;
    SolveMode mode_;
    RunOptions opts_;
    double bound_;
    TimeGrid time_;
    std::unique_ptr<Stepper> stepper_;
    Field u_;
    Field next_;
    int n_ = 0;
    double grad_x_ = 0.0;
    double grad_s_ = 0.0;
    Trajectory traj_;
};

/// u <- u + beta(x, s, u) cellwise.
void apply_jump(Field& u, const Expr& beta);

/// Runs `mode` to T; on a CflViolation restarts once with M doubled.
Trajectory solve(const ProblemSpec& spec, const Grid& grid, SolveMode mode, const RunOptions& opts = {});

/// eps > 0; gamma in (0, gamma0/2] when a source is present.
Trajectory solve_regularized(const ProblemSpec& spec, const Grid& grid, double eps, double gamma,
                             const RunOptions& opts = {});
/// eps = 0 with data fed through the numerical flux at s = 0, S. gamma = 0 with a source is rejected.
Trajectory solve_entropy(const ProblemSpec& spec, const Grid& grid, double gamma, const RunOptions& opts = {});
Trajectory solve_impulsive(const ProblemSpec& spec, const Grid& grid, const RunOptions& opts = {});

enum class TraceSide { S0, SS };

/// Row of cells adjacent to s = 0 (or s = S) at every snapshot.
struct STrace {
    std::vector<double> t;
    std::vector<std::vector<double>> profiles;  // one value per x-cell
};
STrace extract_s_trace(const Trajectory& traj, TraceSide side);

/// dt * sum over faces of |grad_x u|^2 and |d_s u|^2 times the cell volume (lateral ghosts are 0).
struct GradientSums {
    double x = 0.0;
    double s = 0.0;
};
GradientSums gradient_sums(const Field& u);

}  // namespace upk
