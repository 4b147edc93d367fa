#pragma once

#include <string>

#include "upk/problem.hpp"

namespace upk::testing {

inline std::string bump(const std::string& var, double c, double r) {
    return "max(0, 1 - ((" + var + " - " + std::to_string(c) + ")/" + std::to_string(r) + ")^2)^2";
}

/// d = 1, L = 2, T = S = 1, Burgers in s, 0.25 lambda^2 in x, zero boundary data.
inline ProblemSpec burgers_spec(double amplitude = 1.0) {
    ProblemSpec p;
    p.dim = 1;
    p.length = 2.0;
    p.horizon_t = 1.0;
    p.horizon_s = 1.0;
    p.s_flux = Expr::parse("lambda^2/2");
    p.x_flux = {Expr::parse("0.25*lambda^2")};
    p.initial_data = Expr::parse(std::to_string(amplitude) + "*" + bump("x", 1.0, 0.6) + "*" + bump("s", 0.4, 0.3));
    p.s0_data = Expr::parse("0");
    p.sS_data = Expr::parse("0");
    p.impulse_time = 0.5;
    return p;
}

/// Source amplitude c bump(x) bump(s) g(lambda), g a trapezoid equal to 1 on |lambda| <= 1.5 and 0 beyond 2.
inline std::string trapezoid_source(double c) {
    return std::to_string(c) + "*" + bump("x", 1.0, 0.6) + "*" + bump("s", 0.5, 0.3) +
           "*min(1, max(0, (2 - abs(lambda))/0.5))";
}

inline ProblemSpec source_spec(double gamma, double c = 0.5) {
    ProblemSpec p = burgers_spec();
    p.impulse = Expr::parse(trapezoid_source(c));
    p.impulse_support = 2.0;
    p.delay_width = gamma;
    return p;
}

inline Grid grid_for(const ProblemSpec& p, int nx, int ns) {
    Grid g;
    g.dim = p.dim;
    g.nx = nx;
    g.ns = ns;
    g.length = p.length;
    g.horizon_s = p.horizon_s;
    g.horizon_t = p.horizon_t;
    return g;
}

}  // namespace upk::testing
