#pragma once

#include <vector>

#include "upk/expr.hpp"
#include "upk/field.hpp"

namespace upk {

/// chi(lambda; v): 1 on (0, v), -1 on (v, 0), 0 otherwise. The breakpoints
/// lambda = 0 and lambda = v map to 0; they form a null set.
int chi(double lambda, double v);

/// Uniform midpoint grid on [-Lambda, Lambda] with chi(.; v) sampled at the cell centres.
struct ChiSample {
    double half_width = 0.0;
    double v = 0.0;
    std::vector<double> centers;
    std::vector<int> values;

    ChiSample(double v, double half_width, int cells);
    double cell_width() const { return 2.0 * half_width / double(values.size()); }
};

inline constexpr int kDefaultChiCells = 1024;

/// Midpoint quadrature of the integral of psi'(lambda) chi(lambda; v) over [-Lambda, Lambda],
/// which equals Psi(v) - Psi(0) up to O(dlambda).
/// Throws LambdaTooSmall when Lambda < |v|; n_cells must be >= 64.
double chi_integral(const Expr& psi_prime, double v, double half_width, int n_cells = kDefaultChiCells);

/// Midpoint quadrature of the integral of |chi(.; v) - chi(.; w)|, which equals |v - w|.
double chi_distance(double v, double w, double half_width, int n_cells = kDefaultChiCells);

/// sup over cells of
///   | int chi(l; u+) dl - int (1 + d_l beta(x, s, l)) chi(l; u-) dl - beta(x, s, 0) |
/// on [-M3, M3]: the kinetic form of the jump u+ = u- + beta(x, s, u-).
/// Throws GridMismatch when the two fields live on different meshes.
double kinetic_impulse_residual(const Field& u_minus, const Field& u_plus, const Expr& beta, double m3,
                                int n_cells = kDefaultChiCells);

}  // namespace upk
