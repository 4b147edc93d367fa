#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "unit/fixtures.hpp"
#include "upk/errors.hpp"
#include "upk/kernels.hpp"
#include "upk/verify.hpp"

using namespace upk;
using namespace upk::testing;
using Catch::Approx;

namespace {

const Grid& small() {
    static const Grid g = grid_for(burgers_spec(), 16, 16);
    return g;
}

}  // namespace

TEST_CASE("report pass rule", "[verify]") {
    const auto r = VerificationReport::make("x", 1.04, 1.0, 0.05, 0.0, "ctx");
    CHECK(r.pass);
    CHECK(r.margin() == Approx(0.01));
    CHECK_FALSE(VerificationReport::make("x", 1.06, 1.0, 0.05, 0.0, "ctx").pass);
    CHECK(VerificationReport::make("x", 1.06, 1.0, 0.05, 0.02, "ctx").pass);
    CHECK(r.context_hash == fnv1a("ctx"));
}

TEST_CASE("FNV-1a reference values", "[verify]") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("maximum principle checks", "[verify]") {
    SECTION("zero source") {
        const ProblemSpec p = burgers_spec(1.5);
        const Trajectory tr = solve_entropy(p, small(), 0.0);
        const auto r = check_max_principle(tr, p);
        CHECK(r.pass);
        CHECK(r.margin() >= 0.0);
        CHECK(r.bound == Approx(DataNorms(p).all() * kNormInflation));
    }
    SECTION("zero data") {
        ProblemSpec p = burgers_spec();
        p.initial_data = Expr::parse("0");
        const auto r = check_max_principle(solve_entropy(p, small(), 0.0), p);
        CHECK(r.pass);
        CHECK(r.measured == 0.0);
        CHECK(r.bound == 0.0);
    }
    SECTION("mollified source uses the refined exponent") {
        const ProblemSpec p = source_spec(0.1);
        const Trajectory tr = solve_entropy(p, small(), 0.1);
        CHECK(check_max_principle(tr, p).pass);
        const MaxPrincipleBound bound(p, tr.tau_snapped);
        const DataNorms n(p);
        const double xi = 2.0 / (2.0 * 0.5 - 0.5) * std::log(3.0 / n.initial());
        CHECK(bound(0.8) <= std::exp(xi * 0.8) * n.all() * kNormInflation * (1.0 + 1e-12));
    }
    SECTION("impulsive bounds switch at tau") {
        const ProblemSpec p = source_spec(0.0);
        const Trajectory tr = solve_impulsive(p, small());
        CHECK(check_max_principle(tr, p).pass);
        const MaxPrincipleBound bound(p, tr.tau_snapped);
        const ImpulsiveBounds ib = impulsive_bounds(p);
        CHECK(bound(0.2) == Approx(ib.pre * kNormInflation));
        CHECK(bound(tr.tau_snapped) == Approx(ib.post * kNormInflation));
    }
    SECTION("an inflated snapshot fails") {
        const ProblemSpec p = burgers_spec();
        Trajectory tr = solve_entropy(p, small(), 0.0);
        tr.snapshots.back().field.values[5] = 10.0;
        CHECK_FALSE(check_max_principle(tr, p).pass);
    }
}

TEST_CASE("stability checks", "[verify]") {
    const ProblemSpec p1 = burgers_spec(1.0);
    const ProblemSpec p2 = burgers_spec(0.9);
    RunOptions opts;
    opts.bound = 1.1;
    const Trajectory a = solve_entropy(p1, small(), 0.0, opts);
    const Trajectory b = solve_entropy(p2, small(), 0.0, opts);
    SECTION("self comparison") {
        const auto r = check_stability(a, a, p1, p1);
        CHECK(r.pass);
        CHECK(r.measured == 0.0);
    }
    SECTION("contraction without a source") {
        const auto r = check_stability(a, b, p1, p2);
        CHECK(r.pass);
        // The bound is the initial distance.
        CHECK(r.bound == Approx(l1_distance(a.snapshots.front().field, b.snapshots.front().field)));
        CHECK(calibrate_grid_constant(a, b, p1, p2) == 0.0);
    }
    SECTION("mismatched grids") {
        const Trajectory c = solve_entropy(p1, grid_for(p1, 8, 8), 0.0, opts);
        CHECK_THROWS_AS(check_stability(a, c, p1, p1), GridMismatch);
    }
    SECTION("impulsive pair") {
        ProblemSpec q1 = source_spec(0.0);
        ProblemSpec q2 = q1;
        q2.initial_data = p2.initial_data;
        RunOptions o;
        o.bound = 2.0;
        const Trajectory x = solve_impulsive(q1, small(), o);
        const Trajectory y = solve_impulsive(q2, small(), o);
        CHECK(check_stability(x, y, q1, q2).pass);
    }
}

TEST_CASE("energy family", "[verify]") {
    const ProblemSpec p = source_spec(0.2);
    std::vector<Trajectory> runs;
    for (double g : {0.2, 0.1, 0.05}) runs.push_back(solve_entropy(p, small(), g));
    std::vector<const Trajectory*> ptrs;
    for (const auto& r : runs) ptrs.push_back(&r);
    const auto rep = check_energy(ptrs);
    CHECK(rep.pass);
    CHECK(rep.measured >= 1.0);
    ptrs.pop_back();
    CHECK_THROWS_AS(check_energy(ptrs), TooFewRuns);

    ProblemSpec z = burgers_spec();
    z.initial_data = Expr::parse("0");
    const Trajectory zr = solve_entropy(z, small(), 0.0);
    CHECK(check_energy({&zr, &zr, &zr}).measured == 1.0);

    // The eps-weighted term shrinks with eps.
    const ProblemSpec q = burgers_spec();
    const Trajectory e1 = solve_regularized(q, small(), 0.04, 0.0);
    const Trajectory e2 = solve_regularized(q, small(), 0.01, 0.0);
    CHECK(e2.epsilon * e2.snapshots.back().grad_s_sq < e1.epsilon * e1.snapshots.back().grad_s_sq);
}

TEST_CASE("test-function bank", "[verify]") {
    const auto& bank = test_function_bank();
    REQUIRE(bank.size() == 8);
    const ProblemSpec p = burgers_spec();
    for (const auto& b : bank) {
        CHECK(bump_value(b, p, b.cx * p.length, 0.0, b.cs, b.ct) == 1.0);
        CHECK(bump_value(b, p, 0.0, 0.0, b.cs, b.ct) == 0.0);
        CHECK(bump_value(b, p, b.cx * p.length, 0.0, 1.0, b.ct) == 0.0);
        CHECK(b.ct - b.rt >= 0.0);
        CHECK(b.ct + b.rt <= 1.0);
    }
}

TEST_CASE("Kruzhkov bank", "[verify]") {
    const ProblemSpec p = source_spec(0.1);
    const Trajectory tr = solve_entropy(p, small(), 0.1);
    const auto ks = kruzhkov_bank(tr, p);
    REQUIRE(ks.size() == 9);
    CHECK(ks.front() == -ks.back());
    CHECK(ks[4] == 0.0);
    CHECK(ks.back() == Approx(refined_max_bound(p, 1.0)));
    ProblemSpec z = burgers_spec();
    z.initial_data = Expr::parse("0");
    const Trajectory zr = solve_entropy(z, small(), 0.0);
    CHECK(kruzhkov_bank(zr, z).back() == zr.bound);
}

TEST_CASE("entropy residuals", "[verify]") {
    SECTION("shock run dissipates") {
        const ProblemSpec p = burgers_spec(1.5);
        const Trajectory tr = solve_entropy(p, small(), 0.0);
        const std::vector<double> ks{0.0, 0.25, 0.5, 0.75};
        const auto W = weak_entropy_residuals(tr, p, ks);
        double hi = 0.0;
        for (const auto& row : W)
            for (double w : row) {
                CHECK(w >= -1e-8);
                hi = std::max(hi, w);
            }
        CHECK(hi > 1e-6);
        CHECK(check_entropy_residual(tr, p, ks).pass);
    }
    SECTION("zero solution") {
        ProblemSpec p = burgers_spec();
        p.initial_data = Expr::parse("0");
        const Trajectory tr = solve_entropy(p, small(), 0.0);
        for (const auto& row : weak_entropy_residuals(tr, p, {0.0, 0.5}))
            for (double w : row) CHECK(w == 0.0);
    }
    SECTION("k outside the range is conservative") {
        const ProblemSpec p = burgers_spec();
        const Trajectory tr = solve_entropy(p, small(), 0.0);
        for (const auto& row : weak_entropy_residuals(tr, p, {5.0, -5.0}))
            for (double w : row) CHECK(std::fabs(w) <= 1e-8);
    }
    SECTION("mollified source") {
        const ProblemSpec p = source_spec(0.1);
        const Trajectory tr = solve_entropy(p, small(), 0.1);
        CHECK(check_entropy_residual(tr, p, {-0.5, 0.0, 0.3, 0.6, 1.0}).pass);
    }
}

TEST_CASE("BLN inequalities", "[verify]") {
    const ProblemSpec p = burgers_spec(1.5);
    const Trajectory tr = solve_entropy(p, small(), 0.0);
    const auto r = check_bln(tr, p, kruzhkov_bank(tr, p));
    CHECK(r.pass);
    ProblemSpec z = burgers_spec();
    z.initial_data = Expr::parse("0");
    const Trajectory zr = solve_entropy(z, small(), 0.0);
    CHECK(check_bln(zr, z, {-1.0, 0.0, 1.0}).measured == 0.0);
    CHECK(trace_gap(zr, z, TraceSide::S0) == 0.0);
    CHECK(trace_gap(tr, p, TraceSide::SS) >= 0.0);
}

TEST_CASE("jump checks", "[verify]") {
    SECTION("impulsive run") {
        const ProblemSpec p = source_spec(0.0);
        const Trajectory tr = solve_impulsive(p, small());
        const auto rows = check_jump(tr, p);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].name == "jump");
        CHECK(rows[0].pass);
        CHECK(rows[0].measured <= 1e-14);
        CHECK(rows[1].name == "jump_kinetic");
        CHECK(rows[1].pass);
    }
    SECTION("zero source") {
        ProblemSpec p = source_spec(0.0);
        p.impulse = Expr::parse("0");
        const Trajectory tr = solve_impulsive(p, small());
        const auto rows = check_jump(tr, p);
        CHECK(rows[0].measured == 0.0);
        CHECK(rows[1].measured == 0.0);
    }
    SECTION("constant shift") {
        ProblemSpec p = source_spec(0.0);
        p.impulse = Expr::parse("0.25");
        Trajectory tr;
        tr.grid = small();
        Field um(small());
        for (std::size_t i = 0; i < um.values.size(); ++i) um[i] = 0.01 * double(i % 50) - 0.2;
        Field up = um;
        for (auto& v : up.values) v += 0.25;
        tr.tau_minus = um;
        tr.tau_plus = up;
        const auto rows = check_jump(tr, p);
        CHECK(rows[0].measured <= 1e-15);
        CHECK(rows[1].pass);
    }
    SECTION("no traces") {
        const ProblemSpec p = burgers_spec();
        const Trajectory tr = solve_entropy(p, small(), 0.0);
        CHECK_THROWS_AS(check_jump(tr, p), MissingTauTraces);
    }
}

TEST_CASE("gamma limit", "[verify]") {
    SECTION("zero source is degenerate") {
        ProblemSpec p = source_spec(0.0);
        p.impulse = Expr::parse("0");
        const auto res = check_gamma_limit(p, small(), {0.2, 0.1, 0.05});
        for (double e : res.errors) CHECK(e <= 1e-12);
        CHECK(res.window_bitwise);
        CHECK(res.report.pass);
    }
    SECTION("trapezoid source converges") {
        const ProblemSpec p = source_spec(0.0);
        const auto res = check_gamma_limit(p, small(), {0.2, 0.1, 0.05});
        CHECK(res.window_bitwise);
        CHECK(res.errors[1] < res.errors[0]);
        CHECK(res.errors[2] < res.errors[1]);
    }
    SECTION("argument checks") {
        const ProblemSpec p = source_spec(0.0);
        CHECK_THROWS_AS(check_gamma_limit(p, small(), {0.1, 0.2}), GammaOutOfRange);
        CHECK_THROWS_AS(check_gamma_limit(p, small(), {0.3}), GammaOutOfRange);
        CHECK_THROWS_AS(check_gamma_limit(p, small(), {}), GammaOutOfRange);
    }
}

TEST_CASE("viscosity limit", "[verify]") {
    const ProblemSpec p = burgers_spec(1.5);
    CHECK_THROWS_AS(check_viscosity_limit(p, small(), {0.04, 0.02}), TooFewRuns);
    CHECK_THROWS_AS(check_viscosity_limit(p, small(), {0.02, 0.04, 0.01}), ValidationError);
    const auto res = check_viscosity_limit(p, small(), {0.04, 0.02, 0.01});
    REQUIRE(res.successive.size() == 2);
    CHECK(res.to_entropy[2] < res.to_entropy[0]);
    CHECK(res.report.pass == (res.successive[1] < res.successive[0]));
}

TEST_CASE("genuine nonlinearity", "[verify]") {
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    CHECK(validate_genuine_nonlinearity(Expr::parse("lambda^2/2"), 2.0, 128, deltas).report.pass);
    const auto lin = validate_genuine_nonlinearity(Expr::parse("2*lambda"), 2.0, 128, deltas);
    CHECK_FALSE(lin.report.pass);
    CHECK(lin.worst.back() == Approx(4.0));
    const auto zero = validate_genuine_nonlinearity(Expr::parse("0"), 2.0, 128, deltas);
    CHECK_FALSE(zero.report.pass);
    CHECK(zero.worst.back() == Approx(4.0));
    CHECK_THROWS_AS(validate_genuine_nonlinearity(Expr::parse("lambda^2"), 2.0, 32, deltas), DomainError);
}
