#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvnd/dynamics.hpp"
#include "lvnd/error.hpp"
#include "lvnd/periodic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lvnd;

namespace {

SystemSpec periodic_system(const support::Setup& s, double nu1, double nu2) {
    const auto& g = s.grid;
    CoefficientSet set{
        CoefficientField::pointwise(g, 1.0, [](double t, Point p) { return 1.0 + 0.3 * std::sin(2 * M_PI * t) + 0.1 * p.x; }),
        CoefficientField::pointwise(g, 1.0, [](double t, Point) { return 0.8 + 0.2 * std::cos(2 * M_PI * t); }),
        support::constant(g, 2.0), support::constant(g, 1.0),
        CoefficientField::pointwise(g, 1.0, [](double, Point p) { return 0.7 + 0.1 * p.x * p.x; }),
        support::constant(g, 1.5)};
    return make_system(g, s.op, nu1, nu2, std::move(set));
}

}  // namespace

TEST_CASE("rhs at the logistic equilibrium and at the origin") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 2, 1, 1, 2});
    const StateField d = rhs(spec, 0.0, support::uniform_state(16, 0.5, 0.0));
    CHECK(d.u.cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(d.v.cwiseAbs().maxCoeff() == 0.0);
    const StateField z = rhs(spec, 0.3, support::uniform_state(16, 0.0, 0.0));
    CHECK(z.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rhs matches nodewise brute-force evaluation") {
    const auto s = support::line(8, Regime::DirichletType, 2.0, 0.6);
    const SystemSpec spec = support::constant_system(s, 0.7, 1.3, {1.2, 0.9, 2.0, 0.5, 0.4, 1.1});
    support::Rng rng(3);
    const StateField x = support::state(rng.vector(8, 0, 1), rng.vector(8, 0, 1));
    const Eigen::MatrixXd a = oracle::brute_force_matrix(s.grid, 0.6, true, Regime::DirichletType);
    const StateField d = rhs(spec, 0.0, x);
    for (Eigen::Index i = 0; i < 8; ++i) {
        const double du = 0.7 * (a.row(i) * x.u)(0) + x.u[i] * (1.2 - 2.0 * x.u[i] - 0.4 * x.v[i]);
        const double dv = 1.3 * (a.row(i) * x.v)(0) + x.v[i] * (0.9 - 0.5 * x.u[i] - 1.1 * x.v[i]);
        CHECK(d.u[i] == doctest::Approx(du).epsilon(1e-13));
        CHECK(d.v[i] == doctest::Approx(dv).epsilon(1e-13));
    }
}

TEST_CASE("zero data stay zero") {
    const auto s = support::line(16, Regime::DirichletType);
    const SystemSpec spec = periodic_system(s, 1.0, 1.0);
    const Trajectory tr = integrate(spec, support::uniform_state(16, 0, 0), 0.0, 2.0, default_dt(1.0), 10);
    CHECK(tr.size() == 11);
    for (const auto& x : tr.samples) {
        CHECK(x.u.cwiseAbs().maxCoeff() == 0.0);
        CHECK(x.v.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(tr.samples.back().t == 2.0);
}

TEST_CASE("homogeneous logistic matches the closed form") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 1, 1, 1, 1});
    const StateField end = Propagator(spec, default_dt(1.0)).advance(support::uniform_state(16, 0.5, 0.0), 0.0, 1.0);
    const double exact = oracle::logistic(0.5, 1.0);
    CHECK(exact == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK((end.u.array() - exact).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("period map fixed points and semigroup property") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec logistic = support::constant_system(s, 1.0, 1.0, {1.5, 1, 3, 1, 1, 1});
    const StateField eq = poincare_map(logistic, support::uniform_state(16, 0.5, 0.0));
    CHECK((eq.u.array() - 0.5).abs().maxCoeff() <= 1e-9);
    CHECK(eq.v.cwiseAbs().maxCoeff() == 0.0);
    const StateField zero = poincare_map(logistic, support::uniform_state(16, 0, 0));
    CHECK(zero.u.cwiseAbs().maxCoeff() == 0.0);

    const SystemSpec spec = periodic_system(s, 0.8, 1.2);
    support::Rng rng(5);
    const StateField x = support::state(rng.vector(16, 0, 1), rng.vector(16, 0, 1));
    Propagator prop(spec, default_dt(1.0));
    const StateField full = prop.advance(x, 0.0, 1.0);
    const StateField half = prop.advance(prop.advance(x, 0.0, 0.5), 0.5, 1.0);
    CHECK(sup_distance(full, half) <= 1e-9);
    CHECK(sup_distance(full, prop.period_map(x)) == 0.0);
}

TEST_CASE("RK4 period map converges at fourth order") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = periodic_system(s, 1.0, 1.0);
    const StateField x = support::uniform_state(16, 0.4, 0.3);
    auto map = [&](double dt) { return Propagator(spec, dt).period_map(x); };
    const StateField p20 = map(1.0 / 20), p40 = map(1.0 / 40), p80 = map(1.0 / 80);
    const double ratio = sup_distance(p20, p40) / sup_distance(p40, p80);
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
}

TEST_CASE("negativity beyond the clamp is a step-size failure") {
    const auto s = support::line(8, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 1, 1, 1, 1});
    CHECK_THROWS_AS(Propagator(spec, 0.5).advance(support::uniform_state(8, 100.0, 0.0), 0.0, 1.0), Error);
}

TEST_CASE("system validation") {
    const auto s = support::line(8, Regime::NeumannType);
    CHECK_THROWS_AS(support::constant_system(s, 0.0, 1.0, {1, 1, 1, 1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(support::constant_system(s, 1.0, 1.0, {1, 1, 0, 1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(support::constant_system(s, 1.0, 1.0, {1, 1, 1, 1, 1, -2}), ValidationError);
    const SystemSpec ok = support::constant_system(s, 1.0, 2.0, {1, 1, 1, 1, 1, 1});
    CHECK(stability_bound(ok, 2.0) == doctest::Approx(0.1 / (2.0 + 1.0 + 4.0)));
}

TEST_CASE("sub/super-solution defect check") {
    const auto s = support::line(8, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 1, 1, 1, 1});

    // an exact solution is both a sub- and a super-solution
    const Trajectory exact = integrate(spec, support::uniform_state(8, 0.2, 0.1), 0.0, 1.0, default_dt(1.0), 64);
    CHECK(check_subsuper(spec, exact, SolutionKind::Super).satisfied);
    CHECK(check_subsuper(spec, exact, SolutionKind::Sub).satisfied);
    CHECK(check_subsuper(spec, exact, SolutionKind::Super).worst_violation <= 1e-4);

    // constant (2, 0): u_t = 0 but u (1 - u) = -2, so it is a super- but not a sub-solution
    Trajectory frozen;
    frozen.periodic = true;
    for (int k = 0; k <= 32; ++k) {
        auto x = support::uniform_state(8, 2.0, 0.0);
        x.t = k / 32.0;
        frozen.samples.push_back(x);
    }
    CHECK(check_subsuper(spec, frozen, SolutionKind::Super).satisfied);
    const SubSuperReport bad = check_subsuper(spec, frozen, SolutionKind::Sub);
    CHECK_FALSE(bad.satisfied);
    CHECK(bad.worst_violation == doctest::Approx(2.0));
    CHECK(bad.component == 0);
    CHECK(bad.node < 8);
}

TEST_CASE("comparison principle on ordered pairs") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = periodic_system(s, 1.0, 0.6);
    const StateField x = support::uniform_state(16, 0.3, 0.4);
    CHECK(comparison_test(spec, x, x, 2.0, 20).preserved);

    // (0, v*(0)) <=_2 (u*(0), 0)
    const PeriodicOrbit us = semitrivial_u(spec);
    const PeriodicOrbit vs = semitrivial_v(spec);
    const auto zero = Eigen::VectorXd::Zero(16);
    const ComparisonReport r =
        comparison_test(spec, support::state(zero, vs.initial().v), support::state(us.initial().u, zero), 3.0, 30);
    CHECK(r.preserved);
    CHECK(r.nonnegative);

    support::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const StateField lo = support::state(rng.vector(16, 0, 1), rng.vector(16, 0, 1));
        StateField hi = lo;
        hi.u.array() += rng.vector(16, 0, 0.5).array();
        hi.v.array() *= rng.vector(16, 0, 1).array();
        const ComparisonReport c = comparison_test(spec, lo, hi, 2.0, 20);
        CHECK(c.preserved);
        CHECK(c.nonnegative);
    }
    CHECK_THROWS_AS(comparison_test(spec, support::uniform_state(16, 1, 0), support::uniform_state(16, 0, 1), 1.0, 2),
                    ValidationError);
}

TEST_CASE("solutions stay below the logistic caps") {
    const auto s = support::line(16, Regime::DirichletType);
    const SystemSpec spec = periodic_system(s, 1.0, 1.0);
    const CoefficientBounds b = compute_bounds(spec.coefficients, 64);
    const double cu = b.a1.upper / b.b1.lower + 1.0;
    const double cv = b.a2.upper / b.c2.lower + 1.0;
    support::Rng rng(13);
    const StateField x = support::state(rng.vector(16, 0, cu), rng.vector(16, 0, cv));
    const Trajectory tr = integrate(spec, x, 0.0, 50.0, default_dt(1.0), 500);
    for (const auto& y : tr.samples) {
        CHECK(y.nonnegative());
        CHECK(y.u.maxCoeff() <= cu + 1e-6);
        CHECK(y.v.maxCoeff() <= cv + 1e-6);
    }
}
