#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvnd/error.hpp"
#include "lvnd/periodic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lvnd;

namespace {

CoefficientBounds bounds_of(const SystemSpec& spec) {
    return compute_bounds(spec.coefficients, 256);
}

}  // namespace

TEST_CASE("scalar logistic orbits") {
    const auto s = support::line(16, Regime::NeumannType);
    const PeriodicOrbit one = solve_scalar_periodic(s.grid, s.op, 1.0, support::constant(s.grid, 1.0),
                                                    support::constant(s.grid, 1.0));
    CHECK(one.converged);
    CHECK((one.initial().u.array() - 1.0).abs().maxCoeff() <= 1e-9);
    CHECK(one.kind == OrbitKind::SemitrivialU);

    const auto a = CoefficientField::from_expression(s.grid, 1.0, Expression::parse("1 + 0.5*sin(2*pi*t)"));
    const PeriodicOrbit th = solve_scalar_periodic(s.grid, s.op, 1.0, a, support::constant(s.grid, 1.0));
    const auto f = [](double t, double u) { return u * (1 + 0.5 * std::sin(2 * M_PI * t) - u); };
    const double ref = oracle::scalar_periodic(f, 1.0, 1.0, 1e-5);
    CHECK((th.initial().u.array() - ref).abs().maxCoeff() <= 1e-7);
    for (const auto& x : th.slices().samples) {
        const double exact = oracle::scalar_flow(f, ref, x.t, 1e-5);
        CHECK((x.u.array() - exact).abs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("semitrivial orbits respect the a_M / b_L cap") {
    const auto s = support::line(24, Regime::DirichletType);
    CoefficientSet set{
        CoefficientField::pointwise(s.grid, 1.0, [](double t, Point p) { return 2 + 0.5 * std::sin(2 * M_PI * t) + 0.3 * p.x; }),
        CoefficientField::pointwise(s.grid, 1.0, [](double t, Point) { return 1.5 + 0.3 * std::cos(2 * M_PI * t); }),
        CoefficientField::pointwise(s.grid, 1.0, [](double, Point p) { return 1 + 0.2 * p.x * p.x; }),
        support::constant(s.grid, 1.0), support::constant(s.grid, 1.0),
        CoefficientField::pointwise(s.grid, 1.0, [](double, Point p) { return 2 - 0.5 * p.x; })};
    const SystemSpec spec = make_system(s.grid, s.op, 1.0, 0.5, std::move(set));
    const CoefficientBounds b = bounds_of(spec);
    const PeriodicOrbit us = semitrivial_u(spec);
    const PeriodicOrbit vs = semitrivial_v(spec);
    CHECK(us.converged);
    CHECK(vs.converged);
    CHECK(us.kind == OrbitKind::SemitrivialU);
    CHECK(vs.kind == OrbitKind::SemitrivialV);
    CHECK(us.max_u <= b.a1.upper / b.b1.lower + 1e-8);
    CHECK(vs.max_v <= b.a2.upper / b.c2.lower + 1e-8);
    CHECK(us.min_u > 0.0);
    CHECK(us.residual <= 1e-8);
}

TEST_CASE("orbit interpolation and lifetime of derived fields") {
    const auto s = support::line(16, Regime::NeumannType);
    const auto a = CoefficientField::from_expression(s.grid, 1.0, Expression::parse("1 + 0.5*sin(2*pi*t) + 0.2*x"));
    CoefficientField field;
    PeriodicOrbit copy;
    {
        const PeriodicOrbit th = solve_scalar_periodic(s.grid, s.op, 1.0, a, support::constant(s.grid, 1.0));
        field = th.u_field();
        copy = th;
    }
    for (std::size_t k = 0; k < copy.slices().size(); ++k) {
        const StateField& x = copy.slices().samples[k];
        CHECK((copy.at(x.t).u - x.u).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((field.at(x.t) - x.u).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK((copy.at(1.25).u - copy.at(0.25).u).cwiseAbs().maxCoeff() <= 1e-14);
    // between slices the interpolant stays close to the integrator
    Propagator prop(SystemSpec(make_system(s.grid, s.op, 1.0, 1.0,
                                           {a, a, support::constant(s.grid, 1.0), support::constant(s.grid, 1.0),
                                            support::constant(s.grid, 1.0), support::constant(s.grid, 1.0)})),
                    default_dt(1.0));
    const StateField mid = prop.advance(copy.initial(), 0.0, 0.3337);
    CHECK((copy.at(0.3337).u - mid.u).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("criteria arithmetic") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec weak = support::constant_system(s, 1.0, 1.0, {1, 1, 2, 1, 1, 2});
    const CriteriaReport w = evaluate_criteria(weak, bounds_of(weak), 0.0);
    CHECK(w.a1.holds);
    CHECK(w.a2.holds);
    CHECK(w.a3.holds);
    CHECK(w.prediction == Prediction::Coexistence);
    // a1L - c1M a2M / c2L = 1 - 1/2
    CHECK(w.a1.margins[0] == doctest::Approx(0.5));

    const SystemSpec strong = support::constant_system(s, 1.0, 1.0, {2, 1, 1, 1, 1, 1});
    const CriteriaReport b = evaluate_criteria(strong, bounds_of(strong), 0.0);
    CHECK(b.b1.holds);
    CHECK_FALSE(b.b2.holds);
    CHECK(b.prediction == Prediction::UWins);

    const SystemSpec mirror = support::constant_system(s, 1.0, 1.0, {1, 2, 1, 1, 1, 1});
    CHECK(evaluate_criteria(mirror, bounds_of(mirror), 0.0).prediction == Prediction::VWins);

    const auto d = support::line(16, Regime::DirichletType);
    const double l0 = lambda0(d.op);
    const SystemSpec starving = support::constant_system(d, 1.0, 1.0, {-0.5 * l0, 1, 2, 1, 1, 2});
    const CriteriaReport g = evaluate_criteria(starving, bounds_of(starving), l0);
    CHECK_FALSE(g.standing.holds);
    CHECK(g.prediction == Prediction::Inconclusive);
}

TEST_CASE("homogeneous A(3) coexistence is 1/3") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 2, 1, 1, 2});
    const PeriodicOrbit us = semitrivial_u(spec);
    const PeriodicOrbit vs = semitrivial_v(spec);
    const CoexistenceResult r = coexistence_iterate(spec, us, vs);
    // 1 - 2u - v = 0, 1 - u - 2v = 0
    Eigen::Matrix2d m;
    m << 2, 1, 1, 2;
    const Eigen::Vector2d eq = m.partialPivLu().solve(Eigen::Vector2d(1, 1));
    for (const PeriodicOrbit* o : {&r.plus, &r.minus}) {
        CHECK(o->kind == OrbitKind::Coexistence);
        CHECK((o->initial().u.array() - eq[0]).abs().maxCoeff() <= 1e-6);
        CHECK((o->initial().v.array() - eq[1]).abs().maxCoeff() <= 1e-6);
    }
    CHECK(r.sandwich);
    CHECK(r.gap <= 1e-6);
    CHECK(r.plus_corner.check.satisfied);

    const UniquenessReport u = uniqueness_check_A3(spec, r.plus, &us, &vs);
    CHECK(u.ratio == doctest::Approx(1.0));
    CHECK(u.relation_ok);
    CHECK(u.reduced_ok);
    CHECK(u.theta_ok);
}

TEST_CASE("zero epsilon leaves the corner on the boundary") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 2, 1, 1, 2});
    CoexistenceOptions o;
    o.epsilon = 0.0;
    o.verify_corners = false;
    const CoexistenceResult r = coexistence_iterate(spec, semitrivial_u(spec), semitrivial_v(spec), o);
    CHECK(r.plus.kind == OrbitKind::SemitrivialU);
    CHECK(r.minus.kind == OrbitKind::SemitrivialV);
    CHECK(r.plus.initial().v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("theta* gives the semitrivial orbits under A(3)") {
    const auto s = support::line(16, Regime::DirichletType);
    const auto a = CoefficientField::from_expression(s.grid, 1.0, Expression::parse("1.5 + 0.5*sin(2*pi*t)"));
    const auto one = support::constant(s.grid, 1.0);
    const PeriodicOrbit th = solve_scalar_periodic(s.grid, s.op, 1.0, a, one);
    const SystemSpec spec = make_system(s.grid, s.op, 1.0, 1.0,
                                        {a, a, support::constant(s.grid, 2.0), one, one, support::constant(s.grid, 2.0)});
    const PeriodicOrbit us = semitrivial_u(spec);
    const PeriodicOrbit vs = semitrivial_v(spec);
    CHECK((us.initial().u - th.initial().u / 2).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((vs.initial().v - th.initial().u / 2).cwiseAbs().maxCoeff() <= 1e-7);

    // l = a - theta* has zero principal spectrum point
    const CoefficientField t = th.u_field();
    const CoefficientField l = combine(1.0, a, -1.0, one, &t);
    CHECK(std::abs(principal_spectrum_point(s.op, 1.0, l).lambda) < 1e-6);

    const CoexistenceResult r = coexistence_iterate(spec, us, vs);
    const UniquenessReport u = uniqueness_check_A3(spec, r.plus, &us, &vs, &th);
    CHECK(u.relation_ok);
    CHECK(u.reduced_ok);
    CHECK(u.theta_ok);
    CHECK(u.theta_u_error <= 1e-7);
}

TEST_CASE("A(3) orbit attracts random initial data") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {1, 1, 2, 1, 1, 2});
    Propagator prop(spec, default_dt(1.0));
    support::Rng rng(42);
    OrbitOptions o;
    o.slices = 20;
    for (int trial = 0; trial < 5; ++trial) {
        const StateField x = support::state(rng.vector(16, 0.05, 2.0), rng.vector(16, 0.05, 2.0));
        const PeriodicOrbit orb = iterate_to_orbit(prop, x, o, 1e-8);
        CHECK(orb.converged);
        CHECK((orb.initial().u.array() - 1.0 / 3).abs().maxCoeff() <= 1e-5);
        CHECK((orb.initial().v.array() - 1.0 / 3).abs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("uniqueness check requires the A(3) hypotheses") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 2.0, {1, 1, 2, 1, 1, 2});
    PeriodicOrbit dummy = semitrivial_u(spec);
    CHECK_THROWS_AS(uniqueness_check_A3(spec, dummy), HypothesisError);
}

TEST_CASE("extinction runs") {
    const auto s = support::line(16, Regime::NeumannType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {2, 1, 1, 1, 1, 1});
    const PeriodicOrbit us = semitrivial_u(spec);

    const ExtinctionReport now = extinction_run(spec, support::uniform_state(16, 0.5, 0.0), us);
    CHECK(now.extinct);
    CHECK(now.periods == 0);

    const ExtinctionReport r = extinction_run(spec, support::uniform_state(16, 0.5, 0.5), us);
    CHECK(r.extinct);
    CHECK(r.periods <= 200);
    CHECK(r.final_sup_extinct < 1e-6);
    CHECK(r.sandwich_preserved);
    // homogeneous data: the dispersal term vanishes and the planar ODE applies
    const auto f = [](double, double u, double v) {
        return std::make_pair(u * (2 - u - v), v * (1 - u - v));
    };
    const auto [u, v] = oracle::planar_flow(f, 0.5, 0.5, static_cast<double>(r.periods), 1e-4);
    CHECK(v == doctest::Approx(r.final_sup_extinct).epsilon(1e-5));
    CHECK(std::abs(std::abs(u - 2.0) - r.final_distance) <= 1e-10);
}

TEST_CASE("extinction with time-periodic growth keeps the sandwich") {
    const auto s = support::line(16, Regime::NeumannType);
    CoefficientSet set{
        CoefficientField::pointwise(s.grid, 1.0, [](double t, Point) { return 2.5 + 0.3 * std::sin(2 * M_PI * t); }),
        support::constant(s.grid, 1.0), support::constant(s.grid, 1.0), support::constant(s.grid, 1.0),
        support::constant(s.grid, 1.0), support::constant(s.grid, 1.0)};
    const SystemSpec spec = make_system(s.grid, s.op, 1.0, 1.0, std::move(set));
    CHECK(evaluate_criteria(spec, bounds_of(spec), 0.0).b1.holds);
    support::Rng rng(9);
    const StateField x = support::state(rng.vector(16, 0.1, 1.0), rng.vector(16, 0.1, 1.0));
    const ExtinctionReport r = extinction_run(spec, x, semitrivial_u(spec));
    CHECK(r.extinct);
    CHECK(r.sandwich_preserved);
    CHECK(r.sandwich_samples > 0);
    CHECK(r.final_distance < 1e-4);
}
