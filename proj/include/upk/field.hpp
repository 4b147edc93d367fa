#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace upk {

/// Uniform cell-centred mesh on (0, L)^dim x (0, S), plus the time step chosen for a run.
struct Grid {
    int dim = 1;
    int nx = 0;  // cells per spatial axis
    int ns = 0;
    double length = 1.0;
    double horizon_s = 1.0;
    double horizon_t = 1.0;
    double dt = 0.0;  // set by the solver (CFL)
    int nt = 0;

    double dx() const { return length / nx; }
    double ds() const { return horizon_s / ns; }
    std::size_t x_cells() const { return dim == 1 ? std::size_t(nx) : std::size_t(nx) * std::size_t(nx); }
    std::size_t cells() const { return x_cells() * std::size_t(ns); }
    double x_cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }
    double cell_volume() const { return x_cell_volume() * ds(); }
    double x_center(int i) const { return (i + 0.5) * dx(); }
    double s_center(int k) const { return (k + 0.5) * ds(); }

    // Layout is x-major: the Ns values of one x-cell are contiguous.
    std::size_t index(int ix, int is) const { return std::size_t(ix) * std::size_t(ns) + std::size_t(is); }
    std::size_t index(int ix, int iy, int is) const {
        return (std::size_t(ix) * std::size_t(nx) + std::size_t(iy)) * std::size_t(ns) + std::size_t(is);
    }

    struct Coords {
        double x = 0.0;
        double y = 0.0;
        double s = 0.0;
    };
    /// Cell-centre coordinates of a flat index.
    Coords coords(std::size_t idx) const {
        const int is = int(idx % std::size_t(ns));
        const std::size_t xi = idx / std::size_t(ns);
        if (dim == 1) return {x_center(int(xi)), 0.0, s_center(is)};
        return {x_center(int(xi / std::size_t(nx))), x_center(int(xi % std::size_t(nx))), s_center(is)};
    }

    bool same_mesh(const Grid& o) const {
        return dim == o.dim && nx == o.nx && ns == o.ns && length == o.length && horizon_s == o.horizon_s;
    }
};

/// Cell averages u(x, s) at a fixed t.
struct Field {
    Grid grid;
    double t = 0.0;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double time = 0.0, double fill = 0.0)
        : grid(g), t(time), values(g.cells(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> view() const { return values; }

    double sup_norm() const;
    double l1_norm() const;
    double l2_norm_sq() const;
    bool all_finite() const;
};

/// Discrete L1(Xi^1) distance; throws GridMismatch on incompatible meshes.
double l1_distance(const Field& a, const Field& b);
/// max |a - b| over cells; throws GridMismatch.
double sup_distance(const Field& a, const Field& b);

}  // namespace upk
