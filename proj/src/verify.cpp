#include "upk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <sstream>

#include "upk/chi.hpp"
#include "upk/errors.hpp"
#include "upk/kernels.hpp"

namespace upk {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

Bindings at(double x, double y, double s, double t, double lambda) {
    Bindings b;
    b.x(x).y(y).s(s).t(t).lambda(lambda);
    return b;
}

ProblemSpec run_spec(const ProblemSpec& spec, const Trajectory& traj) {
    ProblemSpec p = spec;
    p.viscosity = traj.epsilon;
    p.delay_width = traj.mode == SolveMode::Impulsive ? 0.0 : traj.gamma;
    return p;
}

std::string run_context(const ProblemSpec& spec, const Trajectory& traj) {
    return describe(spec, traj.grid, traj.gamma, traj.epsilon);
}

double sgn(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

}  // namespace

VerificationReport VerificationReport::make(std::string name, double measured, double bound, double tolerance,
                                            double slack, std::string context) {
    VerificationReport r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.tolerance = tolerance;
    r.slack = slack;
    r.pass = measured <= bound * (1.0 + tolerance) + slack;
    r.context = std::move(context);
    r.context_hash = fnv1a(r.context);
    return r;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string describe(const ProblemSpec& spec, const Grid& grid, double gamma, double eps) {
    std::ostringstream os;
    os.precision(17);
    os << "a=" << spec.s_flux.print();
    for (const Expr& phi : spec.x_flux) os << ";phi=" << phi.print();
    os << ";beta=" << (spec.impulse ? spec.impulse->print() : std::string("none"));
    os << ";u0_1=" << spec.initial_data.print() << ";u0_2=" << spec.s0_data.print() << ";uS_2=" << spec.sS_data.print();
    os << ";d=" << spec.dim << ";L=" << spec.length << ";T=" << spec.horizon_t << ";S=" << spec.horizon_s;
    os << ";tau=" << spec.impulse_time << ";b1=" << spec.impulse_support;
    os << ";Nx=" << grid.nx << ";Ns=" << grid.ns << ";dt=" << grid.dt << ";gamma=" << gamma << ";eps=" << eps;
    return os.str();
}

// ---------------------------------------------------------------- maximum principle

MaxPrincipleBound::MaxPrincipleBound(const ProblemSpec& spec, double tau_snapped)
    : spec_(spec), norms_(spec), tau_(tau_snapped) {
    if (!spec_.has_source()) return;
    if (spec_.is_impulsive()) {
        impulsive_ = impulsive_bounds(spec_, norms_);
        return;
    }
    const SampleBox box = spec_.box();
    const double b0 = estimate_lambda_lipschitz(*spec_.impulse, box, spec_.impulse_support);
    const SourceGrowth g = source_growth_constants(*spec_.impulse, spec_.delay_width, b0, box);
    c1_ = g.linear;
    c2_ = g.constant;
    try {
        refined_exponent(norms_.initial(), spec_.impulse_support, spec_.impulse_time, spec_.gamma0());
        refined_ = true;
    } catch (const ZeroInitialData&) {
        refined_ = false;
    }
}

double MaxPrincipleBound::operator()(double t) const {
    if (!spec_.has_source()) return norms_.all(t) * kNormInflation;
    if (spec_.is_impulsive()) return (t < tau_ ? impulsive_.pre : impulsive_.post) * kNormInflation;
    double bound = max_principle_value(norms_.all(t) * kNormInflation, t, c1_, c2_);
    if (refined_) bound = std::min(bound, refined_max_bound(spec_, norms_, t) * kNormInflation);
    return bound;
}

VerificationReport check_max_principle(const Trajectory& traj, const ProblemSpec& spec) {
    const ProblemSpec p = run_spec(spec, traj);
    const MaxPrincipleBound bound(p, traj.tau_snapped);
    double worst_excess = -std::numeric_limits<double>::infinity();
    double measured = 0.0;
    double limit = 0.0;
    double worst_t = 0.0;
    const auto consider = [&](const Field& f, double t) {
        const double sup = f.sup_norm();
        const double b = bound(t);
        if (sup - b > worst_excess) {
            worst_excess = sup - b;
            measured = sup;
            limit = b;
            worst_t = t;
        }
    };
    for (const Snapshot& s : traj.snapshots) consider(s.field, s.field.t);
    if (traj.tau_minus) consider(*traj.tau_minus, std::nextafter(traj.tau_snapped, 0.0));
    if (traj.tau_plus) consider(*traj.tau_plus, traj.tau_snapped);
    auto r = VerificationReport::make("max_principle", measured, limit, 0.0, 1e-10, run_context(spec, traj));
    r.note = "closest approach at t = " + num(worst_t);
    return r;
}

// ---------------------------------------------------------------- stability

namespace {

struct StabilityRow {
    double t = 0.0;
    double distance = 0.0;
    double rhs = 0.0;
};

// L1(Omega) distance of two boundary data functions at time t on the run's x-cells.
double boundary_distance(const Expr& a, const Expr& b, const Grid& g, double s, double t) {
    double total = 0.0;
    for (std::size_t xc = 0; xc < g.x_cells(); ++xc) {
        const auto c = g.coords(xc * std::size_t(g.ns));
        const Bindings bb = at(c.x, c.y, s, t, 0.0);
        total += std::fabs(a.eval(bb) - b.eval(bb));
    }
    return total * g.x_cell_volume();
}

std::vector<StabilityRow> stability_rows(const Trajectory& first, const Trajectory& second, const ProblemSpec& s1,
                                         const ProblemSpec& s2) {
    if (!first.grid.same_mesh(second.grid) || first.grid.dt != second.grid.dt ||
        first.snapshots.size() != second.snapshots.size())
        throw GridMismatch("stability check needs two runs on the same grid and time step");
    for (std::size_t i = 0; i < first.snapshots.size(); ++i)
        if (first.snapshots[i].step != second.snapshots[i].step)
            throw GridMismatch("stability check: snapshot steps differ");

    const Grid& g = first.grid;
    const ProblemSpec p1 = run_spec(s1, first);
    const ProblemSpec p2 = run_spec(s2, second);
    TimeSeries d0{g.dt, {}};
    TimeSeries dS{g.dt, {}};
    for (int n = 0; n < g.nt; ++n) {
        const double tm = (n + 0.5) * g.dt;
        d0.values.push_back(boundary_distance(p1.s0_data, p2.s0_data, g, 0.0, tm));
        dS.values.push_back(boundary_distance(p1.sS_data, p2.sS_data, g, g.horizon_s, tm));
    }
    const double initial = l1_distance(first.snapshots.front().field, second.snapshots.front().field);

    std::vector<StabilityRow> rows;
    const bool impulsive = first.mode == SolveMode::Impulsive && second.mode == SolveMode::Impulsive;
    if (impulsive) {
        const ImpulsiveStabilityBound bound(p1, p2, first.tau_snapped);
        std::vector<double> cum(std::size_t(g.nt) + 1, 0.0);
        for (int n = 0; n < g.nt; ++n)
            cum[std::size_t(n) + 1] = cum[std::size_t(n)] + g.dt * (d0.values[std::size_t(n)] + dS.values[std::size_t(n)]);
        for (std::size_t i = 0; i < first.snapshots.size(); ++i) {
            const int step = first.snapshots[i].step;
            ImpulsiveStabilityInputs in;
            in.t = first.snapshots[i].field.t;
            in.initial_distance = initial;
            in.s0_distance_to_t = cum[std::size_t(step)];
            in.s0_distance_to_tau = cum[std::size_t(std::max(0, first.tau_step))];
            in.tau = first.tau_snapped;
            rows.push_back({in.t, l1_distance(first.snapshots[i].field, second.snapshots[i].field), bound(in)});
        }
        return rows;
    }

    const MaxPrincipleBound m1(p1, first.tau_snapped);
    const MaxPrincipleBound m2(p2, second.tau_snapped);
    double b0 = 0.0;
    if (p1.has_source() && p1.delay_width > 0.0)
        b0 = estimate_lambda_lipschitz(*p1.impulse, p1.box(), p1.impulse_support);
    if (p2.has_source() && p2.delay_width > 0.0)
        b0 = std::max(b0, estimate_lambda_lipschitz(*p2.impulse, p2.box(), p2.impulse_support));
    for (std::size_t i = 0; i < first.snapshots.size(); ++i) {
        StabilityInputs in;
        in.t = first.snapshots[i].field.t;
        in.initial_distance = initial;
        in.s0_distance = d0;
        in.sS_distance = dS;
        in.lambda_lipschitz = b0;
        in.range = std::max(m1(in.t), m2(in.t));
        rows.push_back({in.t, l1_distance(first.snapshots[i].field, second.snapshots[i].field), stability_rhs(p1, in)});
    }
    return rows;
}

double grid_scale(const Grid& g) { return std::sqrt(g.dx()) + std::sqrt(g.ds()); }

constexpr double kStabilityTolerance = 0.05;

}  // namespace

VerificationReport check_stability(const Trajectory& first, const Trajectory& second, const ProblemSpec& first_spec,
                                   const ProblemSpec& second_spec, double grid_constant) {
    const auto rows = stability_rows(first, second, first_spec, second_spec);
    const double slack = grid_constant * grid_scale(first.grid);
    double worst = -std::numeric_limits<double>::infinity();
    StabilityRow pick;
    for (const auto& r : rows) {
        const double excess = r.distance - r.rhs * (1.0 + kStabilityTolerance);
        if (excess > worst) {
            worst = excess;
            pick = r;
        }
    }
    auto rep = VerificationReport::make("stability", pick.distance, pick.rhs, kStabilityTolerance, slack,
                                        run_context(first_spec, first) + "|" + run_context(second_spec, second));
    rep.note = "closest approach at t = " + num(pick.t);
    return rep;
}

double calibrate_grid_constant(const Trajectory& first, const Trajectory& second, const ProblemSpec& first_spec,
                               const ProblemSpec& second_spec) {
    const auto rows = stability_rows(first, second, first_spec, second_spec);
    double k = 0.0;
    for (const auto& r : rows) k = std::max(k, r.distance - r.rhs * (1.0 + kStabilityTolerance));
    return k / grid_scale(first.grid);
}

// ---------------------------------------------------------------- energy

double energy(const Trajectory& traj) {
    const Snapshot& last = traj.snapshots.back();
    return last.field.l2_norm_sq() + last.grad_x_sq + traj.epsilon * last.grad_s_sq;
}

VerificationReport check_energy(const std::vector<const Trajectory*>& runs) {
    if (runs.size() < 3) throw TooFewRuns("energy check needs at least three runs, got " + std::to_string(runs.size()));
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::string context;
    for (const Trajectory* r : runs) {
        const double e = energy(*r);
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        context += "gamma=" + num(r->gamma) + ",eps=" + num(r->epsilon) + ";";
    }
    double ratio = 1.0;
    if (hi > 0.0) ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    auto rep = VerificationReport::make("energy", ratio, 3.0, 0.0, 0.0, context);
    rep.note = "E in [" + num(lo) + ", " + num(hi) + "]";
    return rep;
}

// ---------------------------------------------------------------- entropy residual

const std::vector<TestBump>& test_function_bank() {
    static const std::vector<TestBump> bank = {
        {0.50, 0.30, 0.50, 0.30, 0.50, 0.30}, {0.30, 0.20, 0.30, 0.20, 0.25, 0.20},
        {0.70, 0.20, 0.70, 0.20, 0.75, 0.20}, {0.50, 0.40, 0.25, 0.20, 0.60, 0.35},
        {0.40, 0.25, 0.75, 0.20, 0.30, 0.25}, {0.60, 0.30, 0.50, 0.45, 0.80, 0.18},
        {0.50, 0.45, 0.50, 0.45, 0.50, 0.45}, {0.35, 0.30, 0.60, 0.30, 0.40, 0.30},
    };
    return bank;
}

namespace {

double bump1(double v, double c, double r) {
    const double z = (v - c) / r;
    if (std::fabs(z) >= 1.0) return 0.0;
    const double q = 1.0 - z * z;
    return q * q * q;
}

}  // namespace

double bump_value(const TestBump& b, const ProblemSpec& spec, double x, double y, double s, double t) {
    double v = bump1(x / spec.length, b.cx, b.rx) * bump1(s / spec.horizon_s, b.cs, b.rs) *
               bump1(t / spec.horizon_t, b.ct, b.rt);
    if (spec.dim == 2) v *= bump1(y / spec.length, b.cx, b.rx);
    return v;
}

std::vector<double> kruzhkov_bank(const Trajectory& traj, const ProblemSpec& spec) {
    double m = traj.bound;
    try {
        m = refined_max_bound(run_spec(spec, traj), spec.horizon_t);
    } catch (const ZeroInitialData&) {
    }
    if (!(m > 0.0)) m = 1.0;
    std::vector<double> ks;
    for (int i = 0; i < 9; ++i) ks.push_back(-m + 2.0 * m * i / 8.0);
    return ks;
}

std::vector<std::vector<double>> weak_entropy_residuals(const Trajectory& traj, const ProblemSpec& spec,
                                                        const std::vector<double>& k_values) {
    const ProblemSpec p = run_spec(spec, traj);
    const Grid& g = traj.grid;
    StepOptions so;
    so.flux = traj.flux;
    so.source = traj.mode != SolveMode::Impulsive;
    const Stepper stepper(p, g, traj.bound, so);
    const auto& bank = test_function_bank();

    // Spatial factors of every bump, and the cell volume folded in.
    std::vector<std::vector<double>> space(bank.size(), std::vector<double>(g.cells()));
    for (std::size_t j = 0; j < bank.size(); ++j)
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const auto c = g.coords(i);
            TestBump flat = bank[j];
            flat.ct = 0.5;
            flat.rt = 1e300;
            space[j][i] = bump_value(flat, p, c.x, c.y, c.s, 0.5 * p.horizon_t) * g.cell_volume();
        }

    std::vector<Stepper::EntropyLevel> levels;
    for (double k : k_values) levels.push_back(stepper.entropy_level(k));
    std::vector<std::vector<double>> W(k_values.size(), std::vector<double>(bank.size(), 0.0));
    Field u = traj.snapshots.front().field;
    Field next(g);
    for (int n = 0; n < g.nt; ++n) {
        const double t = n * g.dt;
        stepper.step(u, t, next);
        std::vector<double> tf(bank.size());
        bool any = false;
        for (std::size_t j = 0; j < bank.size(); ++j) {
            tf[j] = bump1(t / p.horizon_t, bank[j].ct, bank[j].rt);
            any = any || tf[j] != 0.0;
        }
        if (any) {
            for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
                const auto r = stepper.entropy_residual(u, next, t, levels[ki]);
                for (std::size_t j = 0; j < bank.size(); ++j) {
                    if (tf[j] == 0.0) continue;
                    double sum = 0.0;
                    for (std::size_t i = 0; i < r.size(); ++i) sum += space[j][i] * r[i];
                    W[ki][j] -= tf[j] * sum;
                }
            }
        }
        std::swap(u, next);
        if (traj.mode == SolveMode::Impulsive && p.has_source() && n + 1 == traj.tau_step) apply_jump(u, *p.impulse);
    }
    return W;
}

VerificationReport check_entropy_residual(const Trajectory& traj, const ProblemSpec& spec,
                                          const std::vector<double>& k_values) {
    const auto W = weak_entropy_residuals(traj, spec, k_values);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : W)
        for (double w : row) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    auto rep = VerificationReport::make("entropy_residual", -lo, 0.0, 0.0, 1e-8, run_context(spec, traj));
    rep.note = "largest dissipation " + num(hi);
    return rep;
}

// ---------------------------------------------------------------- BLN

namespace {

template <class F>
void for_each_trace_sample(const Trajectory& traj, const ProblemSpec& spec, F&& f) {
    const Grid& g = traj.grid;
    for (const Snapshot& snap : traj.snapshots) {
        const double t = snap.field.t;
        for (std::size_t xc = 0; xc < g.x_cells(); ++xc) {
            const std::size_t base = xc * std::size_t(g.ns);
            const auto c = g.coords(base);
            const double d0 = spec.s0_data.eval(at(c.x, c.y, 0.0, t, 0.0));
            const double dS = spec.sS_data.eval(at(c.x, c.y, g.horizon_s, t, 0.0));
            f(snap.field[base], d0, snap.field[base + std::size_t(g.ns - 1)], dS);
        }
    }
}

}  // namespace

VerificationReport check_bln(const Trajectory& traj, const ProblemSpec& spec, const std::vector<double>& k_values) {
    const Grid& g = traj.grid;
    const double tol = 5.0 * (g.ds() + g.dx());
    const Expr& a = spec.s_flux;
    const auto av = [&](double u) { return a.eval(Bindings{}.lambda(u)); };
    double worst = -std::numeric_limits<double>::infinity();
    for_each_trace_sample(traj, spec, [&](double tr0, double d0, double trS, double dS) {
        const double a_tr0 = av(tr0), a_d0 = av(d0), a_trS = av(trS), a_dS = av(dS);
        for (double k : k_values) {
            const double ak = av(k);
            const auto q = [&](double u, double au) { return sgn(u - k) * (au - ak); };
            const double e0 = q(tr0, a_tr0) - q(d0, a_d0) - std::tanh((d0 - k) / 1e-6) * (a_tr0 - a_d0);
            const double eS = q(trS, a_trS) - q(dS, a_dS) - std::tanh((dS - k) / 1e-6) * (a_trS - a_dS);
            worst = std::max({worst, e0, -eS});
        }
    });
    if (!std::isfinite(worst)) worst = 0.0;
    return VerificationReport::make("bln", worst, 0.0, 0.0, tol, run_context(spec, traj));
}

double trace_gap(const Trajectory& traj, const ProblemSpec& spec, TraceSide side) {
    double gap = 0.0;
    for_each_trace_sample(traj, spec, [&](double tr0, double d0, double trS, double dS) {
        gap = std::max(gap, side == TraceSide::S0 ? std::fabs(tr0 - d0) : std::fabs(trS - dS));
    });
    return gap;
}

// ---------------------------------------------------------------- jump

std::vector<VerificationReport> check_jump(const Trajectory& traj, const ProblemSpec& spec) {
    if (!traj.crosses_tau()) throw MissingTauTraces("trajectory has no u(tau - 0) / u(tau + 0) fields");
    const Field& um = *traj.tau_minus;
    const Field& up = *traj.tau_plus;
    const Grid& g = um.grid;
    const Expr beta = spec.impulse ? *spec.impulse : Expr::constant(0.0);

    double pointwise = 0.0;
    for (std::size_t i = 0; i < um.values.size(); ++i) {
        const auto c = g.coords(i);
        pointwise = std::max(pointwise, std::fabs(up[i] - um[i] - beta.eval(at(c.x, c.y, c.s, 0.0, um[i]))));
    }
    const std::string ctx = run_context(spec, traj);
    std::vector<VerificationReport> out;
    out.push_back(VerificationReport::make("jump", pointwise, 0.0, 0.0, 1e-14, ctx));

    ProblemSpec p = spec;
    p.delay_width = 0.0;
    double m3 = impulsive_bounds(p).post * kNormInflation;
    m3 = std::max({m3, um.sup_norm(), up.sup_norm()});
    if (!(m3 > 0.0)) m3 = 1.0;
    const double b0 = spec.impulse ? estimate_lambda_lipschitz(beta, spec.box(), spec.impulse_support) : 0.0;
    const double dl = 2.0 * m3 / kDefaultChiCells;
    const double kinetic = kinetic_impulse_residual(um, up, beta, m3, kDefaultChiCells);
    auto rep = VerificationReport::make("jump_kinetic", kinetic, 3.0 * dl * (1.0 + b0), 0.0, 0.0, ctx);
    rep.note = "M3 = " + num(m3) + ", b0 = " + num(b0);
    out.push_back(rep);
    return out;
}

// ---------------------------------------------------------------- singular limits

namespace {

// Common time step and bound for a family of marchers, then a lockstep march.
struct Lockstep {
    std::vector<std::unique_ptr<Marcher>> runs;
    double dt = 0.0;
    int jobs = 1;

    void advance() {
        if (jobs <= 1 || runs.size() < 2) {
            for (auto& m : runs) m->advance();
            return;
        }
        const std::size_t workers = std::min(runs.size(), std::size_t(jobs));
        std::vector<std::future<void>> pending;
        for (std::size_t w = 0; w < workers; ++w)
            pending.push_back(std::async(std::launch::async, [this, w, workers] {
                for (std::size_t i = w; i < runs.size(); i += workers) runs[i]->advance();
            }));
        for (auto& f : pending) f.get();
    }
};

Lockstep make_lockstep(const std::vector<std::pair<ProblemSpec, SolveMode>>& family, const Grid& grid,
                       const RunOptions& opts, double bound_scale) {
    double M = 0.0;
    for (const auto& [p, mode] : family) {
        ProblemSpec q = p;
        if (mode == SolveMode::Impulsive) q.delay_width = 0.0;
        if (mode != SolveMode::Regularized) q.viscosity = 0.0;
        M = std::max(M, opts.bound > 0.0 ? opts.bound : predicted_sup_bound(q));
    }
    M = std::max(M, 1e-6) * bound_scale;
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& [p, mode] : family) {
        ProblemSpec q = p;
        if (mode == SolveMode::Impulsive) q.delay_width = 0.0;
        if (mode != SolveMode::Regularized) q.viscosity = 0.0;
        dt = std::min(dt, make_time_grid(q, grid, M, opts).dt);
    }
    RunOptions common = opts;
    common.dt = dt;
    common.bound = M;
    Lockstep ls;
    ls.dt = dt;
    ls.jobs = opts.jobs;
    for (const auto& [p, mode] : family) ls.runs.push_back(std::make_unique<Marcher>(p, grid, mode, common));
    return ls;
}

}  // namespace

GammaLimitResult check_gamma_limit(const ProblemSpec& spec, const Grid& grid, const std::vector<double>& gammas,
                                   const RunOptions& opts) {
    if (gammas.empty()) throw GammaOutOfRange("no gamma values given");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] > 0.0) || gammas[i] > 0.5 * spec.gamma0() * (1.0 + 1e-12))
            throw GammaOutOfRange("gamma = " + num(gammas[i]) + " outside (0, gamma0/2] with gamma0 = " + num(spec.gamma0()));
        if (i > 0 && !(gammas[i] < gammas[i - 1])) throw GammaOutOfRange("gamma values must be strictly decreasing");
    }
    std::vector<std::pair<ProblemSpec, SolveMode>> family;
    ProblemSpec limit = spec;
    limit.viscosity = 0.0;
    limit.delay_width = 0.0;
    family.emplace_back(limit, SolveMode::Impulsive);
    for (double g : gammas) {
        ProblemSpec p = limit;
        p.delay_width = g;
        family.emplace_back(p, SolveMode::Entropy);
    }

    GammaLimitResult res;
    res.gammas = gammas;
    for (double scale : {1.0, 2.0}) {
        try {
            Lockstep ls = make_lockstep(family, grid, opts, scale);
            res.dt = ls.dt;
            res.errors.assign(gammas.size(), 0.0);
            res.window_bitwise = true;
            Marcher& star = *ls.runs.front();
            while (!star.done()) {
                ls.advance();
                const double t = star.time();
                for (std::size_t i = 0; i < gammas.size(); ++i) {
                    const Field& u = ls.runs[i + 1]->state();
                    res.errors[i] += ls.dt * l1_distance(u, star.state());
                    if (t <= spec.impulse_time - gammas[i] - ls.dt && u.values != star.state().values)
                        res.window_bitwise = false;
                }
            }
            break;
        } catch (const CflViolation&) {
            if (scale > 1.0) throw;
        }
    }

    const double e_max = *std::max_element(res.errors.begin(), res.errors.end());
    const double e_last = res.errors.back();
    const double e_first = res.errors.front();
    bool monotone = true;
    for (std::size_t i = 1; i < res.errors.size(); ++i) monotone = monotone && res.errors[i] < 1.05 * res.errors[i - 1];
    const bool degenerate = e_max <= 1e-12;
    std::ostringstream ctx;
    ctx << describe(spec, grid, gammas.back(), 0.0) << ";gammas=";
    for (double g : gammas) ctx << g << ",";
    res.report = VerificationReport::make("gamma_limit", e_last, 0.5 * e_first, 0.0, 0.0, ctx.str());
    if (degenerate) res.report = VerificationReport::make("gamma_limit", e_max, 0.0, 0.0, 1e-12, ctx.str());
    res.report.pass = res.report.pass && res.window_bitwise && (monotone || degenerate);
    std::ostringstream note;
    note << "e =";
    for (double e : res.errors) note << " " << e;
    note << "; monotone " << (monotone ? "yes" : "no") << "; window bitwise " << (res.window_bitwise ? "yes" : "no");
    res.report.note = note.str();
    return res;
}

ViscosityLimitResult check_viscosity_limit(const ProblemSpec& spec, const Grid& grid,
                                           const std::vector<double>& epsilons, const RunOptions& opts) {
    if (epsilons.size() < 3) throw TooFewRuns("viscosity check needs at least three epsilon values");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ValidationError("epsilon values must be > 0");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ValidationError("epsilon values must be strictly decreasing");
    }
    std::vector<std::pair<ProblemSpec, SolveMode>> family;
    ProblemSpec base = spec;
    base.viscosity = 0.0;
    family.emplace_back(base, SolveMode::Entropy);
    for (double e : epsilons) {
        ProblemSpec p = base;
        p.viscosity = e;
        family.emplace_back(p, SolveMode::Regularized);
    }
    ViscosityLimitResult res;
    res.epsilons = epsilons;
    for (double scale : {1.0, 2.0}) {
        try {
            Lockstep ls = make_lockstep(family, grid, opts, scale);
            res.dt = ls.dt;
            res.successive.assign(epsilons.size() - 1, 0.0);
            res.to_entropy.assign(epsilons.size(), 0.0);
            Marcher& zero = *ls.runs.front();
            while (!zero.done()) {
                ls.advance();
                for (std::size_t i = 0; i < epsilons.size(); ++i) {
                    res.to_entropy[i] += ls.dt * l1_distance(ls.runs[i + 1]->state(), zero.state());
                    if (i + 1 < epsilons.size())
                        res.successive[i] += ls.dt * l1_distance(ls.runs[i + 2]->state(), ls.runs[i + 1]->state());
                }
            }
            break;
        } catch (const CflViolation&) {
            if (scale > 1.0) throw;
        }
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < res.successive.size(); ++i) decreasing = decreasing && res.successive[i] < res.successive[i - 1];
    std::ostringstream ctx;
    ctx << describe(spec, grid, spec.delay_width, epsilons.back()) << ";eps=";
    for (double e : epsilons) ctx << e << ",";
    res.report = VerificationReport::make("viscosity_limit", res.successive.back(), res.successive.front(), 0.0, 0.0, ctx.str());
    res.report.pass = decreasing;
    std::ostringstream note;
    note << "successive =";
    for (double d : res.successive) note << " " << d;
    note << "; to entropy =";
    for (double d : res.to_entropy) note << " " << d;
    res.report.note = note.str();
    return res;
}

// ---------------------------------------------------------------- genuine nonlinearity

GenuineNonlinearityResult validate_genuine_nonlinearity(const Expr& a, double half_width, int n_dirs,
                                                        const std::vector<double>& deltas) {
    if (!(half_width > 0.0)) throw DomainError("lambda range must be positive");
    if (n_dirs < 64) throw DomainError("at least 64 directions are required");
    if (deltas.empty()) throw DomainError("no delta values given");
    constexpr int cells = 4096;
    const double h = 2.0 * half_width / cells;
    std::vector<double> slope(cells);
    for (int i = 0; i < cells; ++i)
        slope[std::size_t(i)] = a.eval_dual(Bindings{}.lambda(-half_width + (i + 0.5) * h), Var::Lambda).deriv;

    std::vector<std::pair<double, double>> dirs;
    for (int j = 0; j < n_dirs; ++j) {
        const double th = M_PI * j / n_dirs;
        dirs.emplace_back(std::cos(th), std::sin(th));
    }
    dirs.emplace_back(0.0, 1.0);
    for (int i = 0; i < cells; i += 64) {
        const double s = slope[std::size_t(i)];
        const double norm = std::hypot(s, 1.0);
        dirs.emplace_back(-s / norm, 1.0 / norm);
    }

    GenuineNonlinearityResult res;
    res.deltas = deltas;
    for (double d : deltas) {
        std::vector<double> mu;
        double worst = 0.0;
        for (const auto& [x1, x2] : dirs) {
            int count = 0;
            for (double s : slope) count += std::fabs(x1 + s * x2) < d ? 1 : 0;
            mu.push_back(count * h);
            worst = std::max(worst, count * h);
        }
        res.mu.push_back(std::move(mu));
        res.worst.push_back(worst);
    }
    const double d_min = *std::min_element(deltas.begin(), deltas.end());
    const std::size_t at_min = std::size_t(std::min_element(deltas.begin(), deltas.end()) - deltas.begin());
    res.report = VerificationReport::make("genuine_nonlinearity", res.worst[at_min], 10.0 * d_min * half_width, 0.0,
                                          0.0, "a=" + a.print() + ";Lambda=" + num(half_width));
    return res;
}

}  // namespace upk
