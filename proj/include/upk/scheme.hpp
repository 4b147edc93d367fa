#pragma once

#include <vector>

#include "upk/expr.hpp"
#include "upk/field.hpp"
#include "upk/problem.hpp"

namespace upk {

/// (f(uL) + f(uR)) / 2 - alpha (uR - uL) / 2
double lf_flux(double uL, double uR, const Expr& f, double alpha);

/// Engquist-Osher flux f(0) + int_0^uL max(f', 0) + int_0^uR min(f', 0), both integrals by the
/// composite midpoint rule with 64 cells per unit length.
double eo_flux(double uL, double uR, const Expr& f);

/// A two-point monotone flux written in split form F(uL, uR) = A(uL) + B(uR), where A is
/// nondecreasing and B nonincreasing on [-range, range].
///   LF: A = (f + alpha u) / 2, B = (f - alpha u) / 2, alpha = 1.05 max |f'| over the range.
///   EO: A = f(0) + P, B = N with P, N the positive and negative variation integrals, tabulated
///       on a 1/256 lattice (cumulative midpoint rule) and interpolated linearly.
class NumericalFlux {
public:
    NumericalFlux(FluxKind kind, const Expr& f, double range);

    double left(double u) const;
    double right(double u) const;
    double operator()(double uL, double uR) const { return left(uL) + right(uR); }

    FluxKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double range() const { return range_; }

private:
    double table(const std::vector<double>& t, double u) const;

    FluxKind kind_;
    Expr f_;
    double range_;
    double alpha_ = 0.0;
    double f0_ = 0.0;
    int half_ = 0;  // table index of lambda = 0
    std::vector<double> pos_;
    std::vector<double> neg_;
};

inline constexpr double kTableStep = 1.0 / 256.0;

/// safety / (max|a'|/ds + sum_i max|phi_i'|/dx + 2d/dx^2 + 2 eps/ds^2 + sup K b0), derivative maxima
/// sampled on [-M, M]. The source term counts only for the mollified problem (gamma > 0); b0 < 0
/// requests the sampled estimate. Throws DegenerateGrid when a spacing is not positive.
double cfl_dt(const ProblemSpec& spec, const Grid& grid, double M, double safety, double b0 = -1.0,
              bool x_diffusion = true);

struct StepOptions {
    FluxKind flux = FluxKind::EngquistOsher;
    BoundaryMode boundary = BoundaryMode::Physical;
    bool x_diffusion = true;  // debug switch for pure transport tests
    bool source = true;       // apply K beta (never for the impulsive problem)
};

/// Forward Euler step of the conservative scheme for
///   u_t + a(u)_s + div_x phi(u) = Lap_x u + eps u_ss + K(t) beta(x, s, u).
/// Ghost cells: 0 across the lateral boundary; the prescribed data u0_2 / uS_2 across s = 0 / s = S,
/// used both by the numerical flux and by the eps-diffusion stencil. Periodic mode wraps both axes.
class Stepper {
public:
    /// `grid.dt` must be set; M bounds |u| for the flux tables.
    Stepper(const ProblemSpec& spec, const Grid& grid, double M, const StepOptions& options);

    /// Advances u from t to t + dt. Throws NaNDetected naming the first non-finite cell.
    Field step(const Field& u, double t) const;
    void step(const Field& u, double t, Field& out) const;

    /// Per-cell Kruzhkov residual of the step u -> next for eta = |u - k|:
    ///   |next - k| - |u - k| + dt/ds dG_s + dt/dx dG_x - dt (Lap_x + eps D_ss)|w - k|
    ///     - dt K (sgn(u - k)(beta(u) - beta(k)) + |beta(k)|)
    /// with G(uL, uR) = F(uL v k, uR v k) - F(uL ^ k, uR ^ k) and w the state including ghosts.
    /// A monotone step makes every entry <= 0 up to rounding.
    std::vector<double> entropy_residual(const Field& u, const Field& next, double t, double k) const;

    /// Split-flux values A(k), B(k) of every flux, for repeated residuals at the same k.
    struct EntropyLevel {
        double k = 0.0;
        std::vector<double> left;   // a, phi_1, .., phi_d
        std::vector<double> right;
    };
    EntropyLevel entropy_level(double k) const;
    std::vector<double> entropy_residual(const Field& u, const Field& next, double t, const EntropyLevel& level) const;

    /// Source rate K(t_n + dt/2), zero when the source is off.
    double kernel_at(double t) const;
    const Grid& grid() const { return grid_; }
    double bound() const { return bound_; }
    const NumericalFlux& s_flux() const { return a_; }
    const NumericalFlux& x_flux(int i) const { return phi_[std::size_t(i)]; }

private:
    struct Ghosts {
        std::vector<double> s0;  // per x-cell
        std::vector<double> sS;
    };
    Ghosts ghosts(double t) const;
    double beta(std::size_t idx, double lambda) const;

    ProblemSpec spec_;
    Grid grid_;
    double bound_;
    StepOptions options_;
    NumericalFlux a_;
    std::vector<NumericalFlux> phi_;
    std::vector<Grid::Coords> coords_;
};

}  // namespace upk
