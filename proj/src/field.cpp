#include "upk/field.hpp"

#include <algorithm>
#include <cmath>

#include "upk/errors.hpp"

namespace upk {

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

double Field::l1_norm() const {
    double total = 0.0;
    for (double v : values) total += std::fabs(v);
    return total * grid.cell_volume();
}

double Field::l2_norm_sq() const {
    double total = 0.0;
    for (double v : values) total += v * v;
    return total * grid.cell_volume();
}

bool Field::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same(const Field& a, const Field& b) {
    if (!a.grid.same_mesh(b.grid) || a.values.size() != b.values.size())
        throw GridMismatch("fields live on different meshes");
}

}  // namespace

double l1_distance(const Field& a, const Field& b) {
    require_same(a, b);
    double total = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) total += std::fabs(a[i] - b[i]);
    return total * a.grid.cell_volume();
}

double sup_distance(const Field& a, const Field& b) {
    require_same(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace upk
