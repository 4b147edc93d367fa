#include "upk/solver.hpp"

#include <algorithm>
#include <cmath>

#include "upk/errors.hpp"
#include "upk/kernels.hpp"

namespace upk {

Field initial_field(const ProblemSpec& spec, const Grid& grid) {
    Field u(grid, 0.0);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const auto c = grid.coords(i);
        Bindings b;
        b.x(c.x).y(c.y).s(c.s).t(0.0).lambda(0.0);
        u[i] = spec.initial_data.eval(b);
    }
    return u;
}

TimeGrid make_time_grid(const ProblemSpec& spec, const Grid& grid, double M, const RunOptions& opts) {
    double dt = opts.dt;
    if (!(dt > 0.0)) {
        const bool mollified = spec.has_source() && spec.delay_width > 0.0;
        const double b0 = mollified ? estimate_lambda_lipschitz(*spec.impulse, spec.box(), spec.impulse_support) : 0.0;
        dt = cfl_dt(spec, grid, M, opts.cfl_safety, b0, opts.x_diffusion);
    }
    TimeGrid tg;
    tg.nt = std::max(1, int(std::ceil(spec.horizon_t / dt - 1e-9)));
    tg.dt = spec.horizon_t / tg.nt;
    if (spec.has_source() || spec.delay_width > 0.0) tg.tau_step = int(std::lround(spec.impulse_time / tg.dt));
    return tg;
}

GradientSums gradient_sums(const Field& u) {
    const Grid& g = u.grid;
    const long ns = g.ns;
    const long nx = g.nx;
    GradientSums out;
    const double ix2 = 1.0 / (g.dx() * g.dx());
    const double is2 = 1.0 / (g.ds() * g.ds());
    for (std::size_t xc = 0; xc < g.x_cells(); ++xc) {
        const long base = long(xc) * ns;
        for (long k = 0; k + 1 < ns; ++k) {
            const double d = u[std::size_t(base + k + 1)] - u[std::size_t(base + k)];
            out.s += d * d * is2;
        }
    }
    // x faces, including the two lateral ones where the ghost value is 0.
    const auto axis_sum = [&](auto at) {
        double total = 0.0;
        for (long line = 0; line < long(g.x_cells()) / nx; ++line)
            for (long k = 0; k < ns; ++k) {
                double prev = 0.0;
                for (long i = 0; i <= nx; ++i) {
                    const double cur = i < nx ? u[at(line, i, k)] : 0.0;
                    total += (cur - prev) * (cur - prev) * ix2;
                    prev = cur;
                }
            }
        return total;
    };
    if (g.dim == 1) {
        out.x = axis_sum([&](long, long i, long k) { return std::size_t(i * ns + k); });
    } else {
        out.x = axis_sum([&](long line, long i, long k) { return std::size_t((i * nx + line) * ns + k); });
        out.x += axis_sum([&](long line, long i, long k) { return std::size_t((line * nx + i) * ns + k); });
    }
    out.x *= g.cell_volume();
    out.s *= g.cell_volume();
    return out;
}

Marcher::Marcher(const ProblemSpec& spec, const Grid& grid, SolveMode mode, const RunOptions& opts)
    : spec_(spec), mode_(mode), opts_(opts) {
    if (mode_ != SolveMode::Regularized) spec_.viscosity = 0.0;
    if (mode_ == SolveMode::Impulsive) spec_.delay_width = 0.0;
    bound_ = opts.bound > 0.0 ? opts.bound : predicted_sup_bound(spec_);
    bound_ = std::max(bound_, 1e-6);
    time_ = make_time_grid(spec_, grid, bound_, opts_);

    Grid g = grid;
    g.dt = time_.dt;
    g.nt = time_.nt;
    g.horizon_t = spec_.horizon_t;
    StepOptions so;
    so.flux = opts_.flux;
    so.boundary = opts_.boundary;
    so.x_diffusion = opts_.x_diffusion;
    so.source = mode_ != SolveMode::Impulsive;
    stepper_ = std::make_unique<Stepper>(spec_, g, bound_, so);

    u_ = initial_field(spec_, g);
    next_ = Field(g);
    traj_.grid = g;
    traj_.mode = mode_;
    traj_.flux = opts_.flux;
    traj_.gamma = spec_.delay_width;
    traj_.epsilon = spec_.viscosity;
    traj_.bound = bound_;
    traj_.cfl_safety = opts_.cfl_safety;
    traj_.stride = opts_.stride;
    traj_.tau_step = time_.tau_step;
    traj_.tau_snapped = time_.tau_step >= 0 ? time_.tau_step * time_.dt : 0.0;
    record(true);
}

void Marcher::record(bool force) {
    const bool on_stride = opts_.stride > 0 && n_ % opts_.stride == 0;
    const bool at_tau = time_.tau_step >= 0 && (n_ == time_.tau_step || n_ == time_.tau_step + 1);
    if (!(force || on_stride || at_tau || n_ == time_.nt)) return;
    Snapshot snap;
    snap.step = n_;
    snap.field = u_;
    snap.field.t = time();
    snap.grad_x_sq = grad_x_;
    snap.grad_s_sq = grad_s_;
    traj_.snapshots.push_back(std::move(snap));
}

void Marcher::advance() {
    if (done()) return;
    const double t = time();
    stepper_->step(u_, t, next_);
    std::swap(u_, next_);
    ++n_;
    const GradientSums gs = gradient_sums(u_);
    grad_x_ += time_.dt * gs.x;
    grad_s_ += time_.dt * gs.s;
    u_.t = time();

    if (n_ == time_.tau_step && time_.tau_step >= 0) {
        traj_.tau_minus = u_;
        if (mode_ == SolveMode::Impulsive && spec_.has_source()) {
            apply_jump(u_, *spec_.impulse);
            traj_.tau_plus = u_;
        }
    } else if (n_ == time_.tau_step + 1 && time_.tau_step >= 0 && mode_ != SolveMode::Impulsive) {
        traj_.tau_plus = u_;
    }
    if (u_.sup_norm() > bound_)
        throw CflViolation("sup-norm " + std::to_string(u_.sup_norm()) + " exceeds the bound M = " +
                           std::to_string(bound_) + " used for the time step");
    record(false);
}

Trajectory Marcher::run() {
    while (!done()) advance();
    return std::move(traj_);
}

void apply_jump(Field& u, const Expr& beta) {
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const auto c = u.grid.coords(i);
        Bindings b;
        b.x(c.x).y(c.y).s(c.s).t(0.0).lambda(u[i]);
        u[i] = u[i] + beta.eval(b);
    }
}

Trajectory solve(const ProblemSpec& spec, const Grid& grid, SolveMode mode, const RunOptions& opts) {
    try {
        return Marcher(spec, grid, mode, opts).run();
    } catch (const CflViolation&) {
        RunOptions retry = opts;
        const double M = opts.bound > 0.0 ? opts.bound : std::max(predicted_sup_bound(spec), 1e-6);
        retry.bound = 2.0 * M;
        return Marcher(spec, grid, mode, retry).run();
    }
}

namespace {

void require_gamma(const ProblemSpec& spec, double gamma) {
    if (!spec.has_source()) return;
    if (!(gamma > 0.0))
        throw GammaOutOfRange("delay width gamma must be > 0 for the mollified problem; use the impulsive solver for gamma = 0");
    if (gamma > 0.5 * spec.gamma0() * (1.0 + 1e-12))
        throw GammaOutOfRange("delay width gamma = " + std::to_string(gamma) + " exceeds gamma0 / 2 = " +
                              std::to_string(0.5 * spec.gamma0()));
}

}  // namespace

Trajectory solve_regularized(const ProblemSpec& spec, const Grid& grid, double eps, double gamma, const RunOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("regularized problem needs epsilon > 0");
    require_gamma(spec, gamma);
    ProblemSpec p = spec;
    p.viscosity = eps;
    p.delay_width = spec.has_source() ? gamma : 0.0;
    return solve(p, grid, SolveMode::Regularized, opts);
}

Trajectory solve_entropy(const ProblemSpec& spec, const Grid& grid, double gamma, const RunOptions& opts) {
    require_gamma(spec, gamma);
    ProblemSpec p = spec;
    p.viscosity = 0.0;
    p.delay_width = spec.has_source() ? gamma : 0.0;
    return solve(p, grid, SolveMode::Entropy, opts);
}

Trajectory solve_impulsive(const ProblemSpec& spec, const Grid& grid, const RunOptions& opts) {
    ProblemSpec p = spec;
    p.viscosity = 0.0;
    p.delay_width = 0.0;
    return solve(p, grid, SolveMode::Impulsive, opts);
}

STrace extract_s_trace(const Trajectory& traj, TraceSide side) {
    STrace out;
    const Grid& g = traj.grid;
    const std::size_t k = side == TraceSide::S0 ? 0 : std::size_t(g.ns - 1);
    for (const Snapshot& snap : traj.snapshots) {
        out.t.push_back(snap.field.t);
        std::vector<double> row(g.x_cells());
        for (std::size_t xc = 0; xc < row.size(); ++xc) row[xc] = snap.field[xc * std::size_t(g.ns) + k];
        out.profiles.push_back(std::move(row));
    }
    return out;
}

}  // namespace upk
