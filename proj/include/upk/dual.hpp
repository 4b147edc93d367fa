#pragma once

#include <cmath>

namespace upk {

/// Forward-mode dual number: a value and its derivative along one seeded variable.
struct Dual {
    double value = 0.0;
    double deriv = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double v, double d = 0.0) : value(v), deriv(d) {}

    static constexpr Dual variable(double v) { return {v, 1.0}; }
    static constexpr Dual constant(double v) { return {v, 0.0}; }
};

constexpr Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
constexpr Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
constexpr Dual operator*(Dual a, Dual b) {
    return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
// Caller guarantees b.value != 0.
constexpr Dual operator/(Dual a, Dual b) {
    return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
}

inline Dual sin(Dual a) { return {std::sin(a.value), std::cos(a.value) * a.deriv}; }
inline Dual cos(Dual a) { return {std::cos(a.value), -std::sin(a.value) * a.deriv}; }
inline Dual exp(Dual a) {
    const double e = std::exp(a.value);
    return {e, e * a.deriv};
}
inline Dual tanh(Dual a) {
    const double th = std::tanh(a.value);
    return {th, (1.0 - th * th) * a.deriv};
}
// Caller guarantees a.value >= 0.
inline Dual sqrt(Dual a) {
    const double r = std::sqrt(a.value);
    return {r, a.deriv == 0.0 ? 0.0 : a.deriv / (2.0 * r)};
}
// abs'(0) = +1 (right-limit convention).
inline Dual abs(Dual a) { return a.value >= 0.0 ? a : -a; }

// At a tie the one-sided derivative along the seed direction is used.
inline Dual min(Dual a, Dual b) {
    if (a.value < b.value) return a;
    if (b.value < a.value) return b;
    return {a.value, a.deriv < b.deriv ? a.deriv : b.deriv};
}
inline Dual max(Dual a, Dual b) {
    if (a.value > b.value) return a;
    if (b.value > a.value) return b;
    return {a.value, a.deriv > b.deriv ? a.deriv : b.deriv};
}

}  // namespace upk
