#include "upk/chi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "upk/errors.hpp"

namespace upk {

namespace {

void require_width(double half_width, double v) {
    if (half_width < std::fabs(v))
        throw LambdaTooSmall("lambda range " + std::to_string(half_width) + " does not cover |v| = " +
                             std::to_string(std::fabs(v)));
}

// Midpoint sum of chi(.; v) g(.) over [-L, L] without touching cells outside the support of chi.
template <class G>
double chi_sum(double v, double half_width, int cells, G&& g) {
    const double h = 2.0 * half_width / cells;
    // Cells whose centre lies strictly between 0 and v.
    const double lo = std::min(0.0, v);
    const double hi = std::max(0.0, v);
    int first = std::max(0, int(std::floor((lo + half_width) / h - 0.5)));
    int last = std::min(cells - 1, int(std::ceil((hi + half_width) / h - 0.5)));
    double total = 0.0;
    for (int i = first; i <= last; ++i) {
        const double c = -half_width + (i + 0.5) * h;
        const int x = chi(c, v);
        if (x != 0) total += x * g(c);
    }
    return total * h;
}

}  // namespace

int chi(double lambda, double v) {
    if (0.0 < lambda && lambda < v) return 1;
    if (v < lambda && lambda < 0.0) return -1;
    return 0;
}

ChiSample::ChiSample(double v_, double half_width_, int cells) : half_width(half_width_), v(v_) {
    require_width(half_width, v);
    const double h = 2.0 * half_width / cells;
    centers.resize(std::size_t(cells));
    values.resize(std::size_t(cells));
    for (int i = 0; i < cells; ++i) {
        centers[std::size_t(i)] = -half_width + (i + 0.5) * h;
        values[std::size_t(i)] = chi(centers[std::size_t(i)], v);
    }
}

double chi_integral(const Expr& psi_prime, double v, double half_width, int n_cells) {
    require_width(half_width, v);
    if (n_cells < 64) throw DomainError("chi quadrature needs at least 64 cells");
    Bindings b;
    return chi_sum(v, half_width, n_cells, [&](double lam) { return psi_prime.eval(b.lambda(lam)); });
}

double chi_distance(double v, double w, double half_width, int n_cells) {
    require_width(half_width, v);
    require_width(half_width, w);
    if (n_cells < 64) throw DomainError("chi quadrature needs at least 64 cells");
    const double h = 2.0 * half_width / n_cells;
    double total = 0.0;
    for (int i = 0; i < n_cells; ++i) {
        const double c = -half_width + (i + 0.5) * h;
        total += std::abs(chi(c, v) - chi(c, w));
    }
    return total * h;
}

double kinetic_impulse_residual(const Field& u_minus, const Field& u_plus, const Expr& beta, double m3,
                                int n_cells) {
    if (!u_minus.grid.same_mesh(u_plus.grid) || u_minus.values.size() != u_plus.values.size())
        throw GridMismatch("kinetic residual: u(tau-0) and u(tau+0) live on different meshes");
    double worst = 0.0;
    Bindings b;
    for (std::size_t i = 0; i < u_minus.values.size(); ++i) {
        const auto c = u_minus.grid.coords(i);
        b.x(c.x).y(c.y).s(c.s);
        const double um = u_minus[i];
        const double up = u_plus[i];
        require_width(m3, um);
        require_width(m3, up);
        const double lhs = chi_sum(up, m3, n_cells, [](double) { return 1.0; });
        const double rhs = chi_sum(um, m3, n_cells, [&](double lam) {
            b.lambda(lam);
            return 1.0 + beta.eval_dual(b, Var::Lambda).deriv;
        });
        b.lambda(0.0);
        worst = std::max(worst, std::fabs(lhs - rhs - beta.eval(b)));
    }
    return worst;
}

}  // namespace upk
