#include "upk/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "upk/errors.hpp"
#include "upk/kernels.hpp"

namespace upk {

namespace {

double fprime(const Expr& f, double u) { return f.eval_dual(Bindings{}.lambda(u), Var::Lambda).deriv; }

// Midpoint rule for the integral of g(f'(l)) over [from, to] with `per_unit` cells per unit length.
template <class G>
double variation(const Expr& f, double from, double to, int per_unit, G&& g) {
    const double len = to - from;
    if (len == 0.0) return 0.0;
    const int n = std::max(1, int(std::ceil(std::fabs(len) * per_unit)));
    const double h = len / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += g(fprime(f, from + (i + 0.5) * h));
    return total * h;
}

double positive_part(double v) { return std::max(v, 0.0); }
double negative_part(double v) { return std::min(v, 0.0); }

}  // namespace

double lf_flux(double uL, double uR, const Expr& f, double alpha) {
    Bindings b;
    const double fl = f.eval(b.lambda(uL));
    const double fr = f.eval(b.lambda(uR));
    return 0.5 * (fl + fr) - 0.5 * alpha * (uR - uL);
}

double eo_flux(double uL, double uR, const Expr& f) {
    const double f0 = f.eval(Bindings{}.lambda(0.0));
    return f0 + variation(f, 0.0, uL, 64, positive_part) + variation(f, 0.0, uR, 64, negative_part);
}

NumericalFlux::NumericalFlux(FluxKind kind, const Expr& f, double range)
    : kind_(kind), f_(f), range_(std::max(range, kTableStep)) {
    f0_ = f_.eval(Bindings{}.lambda(0.0));
    if (kind_ == FluxKind::LaxFriedrichs) {
        alpha_ = 1.05 * max_abs_derivative(f_, range_);
        return;
    }
    half_ = int(std::ceil(range_ / kTableStep)) + 1;
    const std::size_t size = std::size_t(2 * half_ + 1);
    pos_.assign(size, 0.0);
    neg_.assign(size, 0.0);
    for (int j = 0; j < half_; ++j) {
        const double up = fprime(f_, (j + 0.5) * kTableStep);
        const double dn = fprime(f_, -(j + 0.5) * kTableStep);
        const std::size_t hi = std::size_t(half_ + j + 1);
        const std::size_t lo = std::size_t(half_ - j - 1);
        pos_[hi] = pos_[hi - 1] + kTableStep * positive_part(up);
        neg_[hi] = neg_[hi - 1] + kTableStep * negative_part(up);
        pos_[lo] = pos_[lo + 1] - kTableStep * positive_part(dn);
        neg_[lo] = neg_[lo + 1] - kTableStep * negative_part(dn);
    }
}

double NumericalFlux::table(const std::vector<double>& t, double u) const {
    const double p = u / kTableStep + half_;
    const int last = int(t.size()) - 1;
    if (p >= 0.0 && p <= last) {
        const int j = std::min(int(p), last - 1);
        const double w = p - j;
        return (1.0 - w) * t[std::size_t(j)] + w * t[std::size_t(j + 1)];
    }
    // Outside the tabulated range: continue the integral from the nearest end.
    const bool positive = &t == &pos_;
    const double edge = p < 0.0 ? -half_ * kTableStep : half_ * kTableStep;
    const double base = p < 0.0 ? t.front() : t.back();
    return base + (positive ? variation(f_, edge, u, 256, positive_part) : variation(f_, edge, u, 256, negative_part));
}

double NumericalFlux::left(double u) const {
    if (kind_ == FluxKind::LaxFriedrichs) return 0.5 * (f_.eval(Bindings{}.lambda(u)) + alpha_ * u);
    return f0_ + table(pos_, u);
}

double NumericalFlux::right(double u) const {
    if (kind_ == FluxKind::LaxFriedrichs) return 0.5 * (f_.eval(Bindings{}.lambda(u)) - alpha_ * u);
    return table(neg_, u);
}

double cfl_dt(const ProblemSpec& spec, const Grid& grid, double M, double safety, double b0, bool x_diffusion) {
    if (grid.nx <= 0 || grid.ns <= 0 || !(grid.dx() > 0.0) || !(grid.ds() > 0.0))
        throw DegenerateGrid("grid spacings must be positive");
    if (!(safety > 0.0 && safety <= 1.0)) throw DegenerateGrid("CFL safety factor must lie in (0, 1]");
    const double dx = grid.dx();
    const double ds = grid.ds();
    double rate = max_abs_derivative(spec.s_flux, M) / ds;
    for (const Expr& phi : spec.x_flux) rate += max_abs_derivative(phi, M) / dx;
    if (x_diffusion) rate += 2.0 * spec.dim / (dx * dx);
    rate += 2.0 * spec.viscosity / (ds * ds);
    if (spec.has_source() && spec.delay_width > 0.0) {
        if (b0 < 0.0) b0 = estimate_lambda_lipschitz(*spec.impulse, spec.box(), spec.impulse_support);
        rate += DelayedKernel(spec.impulse_time, spec.delay_width).sup() * b0;
    }
    if (rate == 0.0) return grid.horizon_t;
    return safety / rate;
}

Stepper::Stepper(const ProblemSpec& spec, const Grid& grid, double M, const StepOptions& options)
    : spec_(spec), grid_(grid), bound_(M), options_(options), a_(options.flux, spec.s_flux, M) {
    if (!(grid_.dt > 0.0)) throw DegenerateGrid("time step must be positive");
    for (const Expr& phi : spec_.x_flux) phi_.emplace_back(options.flux, phi, M);
    coords_.resize(grid_.cells());
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] = grid_.coords(i);
}

double Stepper::kernel_at(double t) const {
    if (!options_.source || !spec_.has_source() || spec_.delay_width <= 0.0) return 0.0;
    return k_gamma(t + 0.5 * grid_.dt, spec_.impulse_time, spec_.delay_width);
}

double Stepper::beta(std::size_t idx, double lambda) const {
    const auto& c = coords_[idx];
    Bindings b;
    b.x(c.x).y(c.y).s(c.s).t(0.0).lambda(lambda);
    return spec_.impulse->eval(b);
}

Stepper::Ghosts Stepper::ghosts(double t) const {
    Ghosts g;
    const std::size_t nxc = grid_.x_cells();
    g.s0.assign(nxc, 0.0);
    g.sS.assign(nxc, 0.0);
    if (options_.boundary == BoundaryMode::Periodic) return g;
    const double tm = t + 0.5 * grid_.dt;
    for (std::size_t xc = 0; xc < nxc; ++xc) {
        const auto& c = coords_[xc * std::size_t(grid_.ns)];
        Bindings b;
        b.x(c.x).y(c.y).t(tm).lambda(0.0);
        g.s0[xc] = spec_.s0_data.eval(b.s(0.0));
        g.sS[xc] = spec_.sS_data.eval(b.s(grid_.horizon_s));
    }
    return g;
}

namespace {

// Neighbour of x-cell xc along `axis` in direction dir (+1 / -1); -1 when it is a ghost.
long x_neighbor(const Grid& g, long xc, int axis, int dir, bool periodic) {
    const long nx = g.nx;
    long ix = g.dim == 1 ? xc : xc / nx;
    long iy = g.dim == 1 ? 0 : xc % nx;
    long& moved = axis == 0 ? ix : iy;
    moved += dir;
    if (moved < 0 || moved >= nx) {
        if (!periodic) return -1;
        moved = (moved + nx) % nx;
    }
    return g.dim == 1 ? ix : ix * nx + iy;
}

}  // namespace

void Stepper::step(const Field& u, double t, Field& out) const {
    const Grid& g = grid_;
    const long ns = g.ns;
    const long nxc = long(g.x_cells());
    const std::size_t n = g.cells();
    const bool periodic = options_.boundary == BoundaryMode::Periodic;
    const double dt = g.dt;
    const double ls = dt / g.ds();
    const double lx = dt / g.dx();
    const double dx2 = options_.x_diffusion ? dt / (g.dx() * g.dx()) : 0.0;
    const double es = spec_.viscosity * dt / (g.ds() * g.ds());
    const double K = kernel_at(t);
    const Ghosts gh = ghosts(t);

    std::vector<double> aL(n), aR(n);
    for (std::size_t i = 0; i < n; ++i) {
        aL[i] = a_.left(u[i]);
        aR[i] = a_.right(u[i]);
    }
    std::vector<std::vector<double>> pL(phi_.size(), std::vector<double>(n)), pR(phi_.size(), std::vector<double>(n));
    for (std::size_t d = 0; d < phi_.size(); ++d)
        for (std::size_t i = 0; i < n; ++i) {
            pL[d][i] = phi_[d].left(u[i]);
            pR[d][i] = phi_[d].right(u[i]);
        }

    if (out.values.size() != n) out = Field(g);
    out.grid = g;
    out.t = t + dt;
    for (long xc = 0; xc < nxc; ++xc) {
        const double g0 = gh.s0[std::size_t(xc)];
        const double gS = gh.sS[std::size_t(xc)];
        const double g0L = a_.left(g0);
        const double gSR = a_.right(gS);
        long nb[2][2];
        for (int d = 0; d < g.dim; ++d) {
            nb[d][0] = x_neighbor(g, xc, d, -1, periodic);
            nb[d][1] = x_neighbor(g, xc, d, +1, periodic);
        }
        for (long is = 0; is < ns; ++is) {
            const std::size_t i = std::size_t(xc * ns + is);
            const double ui = u[i];
            double um, up, Fm, Fp;
            if (is > 0) {
                um = u[i - 1];
                Fm = aL[i - 1] + aR[i];
            } else if (periodic) {
                um = u[i + std::size_t(ns - 1)];
                Fm = aL[i + std::size_t(ns - 1)] + aR[i];
            } else {
                um = g0;
                Fm = g0L + aR[i];
            }
            if (is < ns - 1) {
                up = u[i + 1];
                Fp = aL[i] + aR[i + 1];
            } else if (periodic) {
                up = u[i - std::size_t(ns - 1)];
                Fp = aL[i] + aR[i - std::size_t(ns - 1)];
            } else {
                up = gS;
                Fp = aL[i] + gSR;
            }
            double v = ui - ls * (Fp - Fm);
            double lap = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                const long lo = nb[d][0];
                const long hi = nb[d][1];
                const std::size_t jl = std::size_t(lo * ns + is);
                const std::size_t jh = std::size_t(hi * ns + is);
                const double xm = lo < 0 ? 0.0 : u[jl];
                const double xp = hi < 0 ? 0.0 : u[jh];
                const double Gm = (lo < 0 ? phi_[std::size_t(d)].left(0.0) : pL[std::size_t(d)][jl]) + pR[std::size_t(d)][i];
                const double Gp = pL[std::size_t(d)][i] + (hi < 0 ? phi_[std::size_t(d)].right(0.0) : pR[std::size_t(d)][jh]);
                v -= lx * (Gp - Gm);
                lap += xp - 2.0 * ui + xm;
            }
            v += dx2 * lap;
            if (es != 0.0) v += es * (up - 2.0 * ui + um);
            if (K != 0.0) v += dt * K * beta(i, ui);
            if (!std::isfinite(v)) {
                const auto& c = coords_[i];
                std::ostringstream os;
                os << "non-finite value at x = " << c.x << ", y = " << c.y << ", s = " << c.s << ", t = " << t + dt;
                throw NaNDetected(os.str());
            }
            out[i] = v;
        }
    }
}

Field Stepper::step(const Field& u, double t) const {
    Field out(grid_, t + grid_.dt);
    step(u, t, out);
    return out;
}

Stepper::EntropyLevel Stepper::entropy_level(double k) const {
    EntropyLevel lv;
    lv.k = k;
    lv.left.push_back(a_.left(k));
    lv.right.push_back(a_.right(k));
    for (const auto& f : phi_) {
        lv.left.push_back(f.left(k));
        lv.right.push_back(f.right(k));
    }
    return lv;
}

std::vector<double> Stepper::entropy_residual(const Field& u, const Field& next, double t, double k) const {
    return entropy_residual(u, next, t, entropy_level(k));
}

std::vector<double> Stepper::entropy_residual(const Field& u, const Field& next, double t,
                                              const EntropyLevel& level) const {
    const double k = level.k;
    const Grid& g = grid_;
    const long ns = g.ns;
    const long nxc = long(g.x_cells());
    const bool periodic = options_.boundary == BoundaryMode::Periodic;
    const double dt = g.dt;
    const double ls = dt / g.ds();
    const double lx = dt / g.dx();
    const double dx2 = options_.x_diffusion ? dt / (g.dx() * g.dx()) : 0.0;
    const double es = spec_.viscosity * dt / (g.ds() * g.ds());
    const double K = kernel_at(t);
    const Ghosts gh = ghosts(t);

    // G(l, r) = F(l v k, r v k) - F(l ^ k, r ^ k), expanded through the split form F = A(l) + B(r).
    struct AtK {
        double left;
        double right;
    };
    const AtK ak{level.left[0], level.right[0]};
    std::vector<AtK> phik;
    for (std::size_t d = 0; d < phi_.size(); ++d) phik.push_back({level.left[d + 1], level.right[d + 1]});
    const auto G = [k](const NumericalFlux& F, const AtK& fk, double l, double r) {
        const double fl = F.left(l);
        const double fr = F.right(r);
        return (l > k ? fl - fk.left : fk.left - fl) + (r > k ? fr - fk.right : fk.right - fr);
    };
    std::vector<double> res(g.cells(), 0.0);
    for (long xc = 0; xc < nxc; ++xc) {
        for (long is = 0; is < ns; ++is) {
            const std::size_t i = std::size_t(xc * ns + is);
            const double ui = u[i];
            const double um = is > 0 ? u[i - 1] : periodic ? u[i + std::size_t(ns - 1)] : gh.s0[std::size_t(xc)];
            const double up = is < ns - 1 ? u[i + 1] : periodic ? u[i - std::size_t(ns - 1)] : gh.sS[std::size_t(xc)];
            const double eta = std::fabs(ui - k);
            double r = std::fabs(next[i] - k) - eta;
            r += ls * (G(a_, ak, ui, up) - G(a_, ak, um, ui));
            double lap = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                const long lo = x_neighbor(g, xc, d, -1, periodic);
                const long hi = x_neighbor(g, xc, d, +1, periodic);
                const double xm = lo < 0 ? 0.0 : u[std::size_t(lo * ns + is)];
                const double xp = hi < 0 ? 0.0 : u[std::size_t(hi * ns + is)];
                r += lx * (G(phi_[std::size_t(d)], phik[std::size_t(d)], ui, xp) -
                           G(phi_[std::size_t(d)], phik[std::size_t(d)], xm, ui));
                lap += std::fabs(xp - k) - 2.0 * eta + std::fabs(xm - k);
            }
            r -= dx2 * lap;
            r -= es * (std::fabs(up - k) - 2.0 * eta + std::fabs(um - k));
            if (K != 0.0) {
                const double bk = beta(i, k);
                const double sg = ui > k ? 1.0 : ui < k ? -1.0 : 0.0;
                r -= dt * K * (sg * (beta(i, ui) - bk) + std::fabs(bk));
            }
            res[i] = r;
        }
    }
    return res;
}

}  // namespace upk
