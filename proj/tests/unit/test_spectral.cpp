#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvnd/error.hpp"
#include "lvnd/periodic.hpp"
#include "lvnd/spectral.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lvnd;

namespace {

CoefficientField sin_plus_x(const Grid& g) {
    return CoefficientField::pointwise(g, 1.0, [](double t, Point p) { return std::sin(2 * M_PI * t) + p.x; });
}

std::function<Eigen::VectorXd(double)> sampler(const CoefficientField& f) {
    return [&f](double t) { return f.at(t); };
}

}  // namespace

TEST_CASE("period map on constants") {
    const auto s = support::line(16, Regime::NeumannType);
    const LinearPeriodMap p0(s.op, 1.3, support::constant(s.grid, 0.0));
    CHECK((p0.apply(Eigen::VectorXd::Ones(16)).array() - 1.0).abs().maxCoeff() <= 1e-14);
    const LinearPeriodMap pc(s.op, 1.3, support::constant(s.grid, 0.4, 2.0));
    CHECK((pc.apply(Eigen::VectorXd::Ones(16)).array() - std::exp(0.8)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("period matrix matches the dense oracle column by column") {
    const auto s = support::line(8, Regime::DirichletType, 2.0, 0.6);
    const CoefficientField l = sin_plus_x(s.grid);
    const LinearPeriodMap p(s.op, 0.9, l);
    const Eigen::MatrixXd a = oracle::brute_force_matrix(s.grid, 0.6, true, Regime::DirichletType);
    const Eigen::MatrixXd ref = oracle::period_matrix(a, 0.9, sampler(l), 1.0, 4000);
    const Eigen::MatrixXd m = p.matrix();
    for (Eigen::Index j = 0; j < 8; ++j) {
        const Eigen::VectorXd col = p.apply(Eigen::VectorXd::Unit(8, j));
        CHECK((col - ref.col(j)).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((m.col(j) - ref.col(j)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("baseline spectrum points per regime") {
    for (Regime r : {Regime::NeumannType, Regime::Periodic}) {
        const auto s = support::line(32, r);
        const SpectralResult res = principal_spectrum_point(s.op, 1.0, support::constant(s.grid, 0.0));
        CHECK(std::abs(res.lambda) <= 1e-12);
        CHECK(std::abs(lambda0(s.op)) <= 1e-12);
    }
    const auto d = support::line(64, Regime::DirichletType);
    const double l0 = lambda0(d.op);
    CHECK(l0 < -1e-4);
    // time-frozen input: the dominant eigenvalue of the autonomous generator
    const Eigen::MatrixXd a = oracle::brute_force_matrix(d.grid, 0.5, true, Regime::DirichletType);
    CHECK(l0 == doctest::Approx(oracle::symmetric_top(a)).epsilon(1e-8));
}

TEST_CASE("frozen coefficients reduce to the autonomous eigenvalue") {
    const auto s = support::line(24, Regime::NeumannType);
    const auto l = CoefficientField::pointwise(s.grid, 1.0, [](double, Point p) { return 0.5 * std::cos(3 * p.x); },
                                               false, true);
    const SpectralResult res = principal_spectrum_point(s.op, 0.7, l);
    Eigen::MatrixXd gen = 0.7 * oracle::brute_force_matrix(s.grid, 0.5, true, Regime::NeumannType);
    gen.diagonal() += l.at(0.0);
    CHECK(std::abs(res.lambda - oracle::symmetric_top(gen)) <= 1e-8);
}

TEST_CASE("DirichletType with time-periodic l agrees with the eigensolver oracle") {
    const auto s = support::line(16, Regime::DirichletType, 2.0, 0.5);
    const CoefficientField l = sin_plus_x(s.grid);
    const SpectralResult res = principal_spectrum_point(s.op, 1.0, l);
    const Eigen::MatrixXd a = oracle::brute_force_matrix(s.grid, 0.5, true, Regime::DirichletType);
    const double ref = oracle::floquet_exponent(oracle::period_matrix(a, 1.0, sampler(l), 1.0, 4000), 1.0);
    CHECK(std::abs(res.lambda - ref) <= 1e-8);
    CHECK(res.converged);
    CHECK(res.perron_function.minCoeff() > 0.0);
    CHECK(res.perron_function.maxCoeff() == doctest::Approx(1.0));
}

TEST_CASE("l = 0 spectrum scales with the dispersal rate") {
    const auto d = support::line(32, Regime::DirichletType);
    const double one = principal_spectrum_point(d.op, 1.0, support::constant(d.grid, 0.0)).lambda;
    const double two = principal_spectrum_point(d.op, 2.0, support::constant(d.grid, 0.0)).lambda;
    CHECK(std::abs(two - 2.0 * one) <= 1e-10);
}

TEST_CASE("principal eigenvalue classification") {
    const auto s = support::line(32, Regime::DirichletType);
    const SpectralResult res = principal_spectrum_point(s.op, 1.0, sin_plus_x(s.grid));
    CHECK(res.gap_tol == doctest::Approx(1e-7 * (1 + std::abs(res.lambda))));
    CHECK(res.gap == doctest::Approx(res.lambda - res.max_diagonal));
    if (res.gap > res.gap_tol) {
        CHECK(res.existence == Existence::Exists);
        CHECK(res.is_principal_eigenvalue);
        CHECK(res.perron_function.minCoeff() > 0.0);
    }
    // spatially constant l on NeumannType: lambda is the time average and beats max(nu m + l)
    const auto n = support::line(16, Regime::NeumannType);
    const auto c = CoefficientField::from_expression(n.grid, 1.0, Expression::parse("0.3 + sin(2*pi*t)"));
    const SpectralResult rc = principal_spectrum_point(n.op, 1.0, c);
    CHECK(std::abs(rc.lambda - 0.3) <= 1e-12);
}

TEST_CASE("shift identity and monotonicity") {
    const auto s = support::line(16, Regime::DirichletType);
    const CoefficientField l = sin_plus_x(s.grid);
    const ShiftMonotonicityReport same = verify_shift_and_monotonicity(s.op, 1.0, l, l, 0.0);
    CHECK(std::abs(same.monotone_slack) <= 1e-10);
    CHECK(same.shift_error <= 1e-10);
    CHECK(same.monotone);
    CHECK(same.shift_identity);

    support::Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const double amp = rng.uniform(0.1, 1.0), phase = rng.uniform(0, 6.28), bump = rng.uniform(0, 0.5);
        const auto base = CoefficientField::pointwise(
            s.grid, 1.0, [=](double t, Point p) { return amp * std::sin(2 * M_PI * t + phase) * p.x; });
        const auto upper = CoefficientField::pointwise(s.grid, 1.0, [=](double t, Point p) {
            return amp * std::sin(2 * M_PI * t + phase) * p.x + bump * (1 + std::cos(2 * M_PI * t)) * (1 - p.x * p.x);
        });
        const ShiftMonotonicityReport r = verify_shift_and_monotonicity(s.op, 1.0, base, upper, rng.uniform(-1, 1));
        CHECK(r.monotone);
        CHECK(r.shift_identity);
    }
    const auto bigger = l.shifted(0.1);
    CHECK_THROWS_AS(verify_shift_and_monotonicity(s.op, 1.0, bigger, l, 0.0), ValidationError);
}

TEST_CASE("zero-lambda certificates") {
    const auto n = support::line(16, Regime::NeumannType);
    const std::vector<Eigen::VectorXd> ones(4, Eigen::VectorXd::Ones(16));
    const ZeroLambdaCertificate c = zero_lambda_certificate(n.op, 1.0, support::constant(n.grid, 0.0), ones);
    CHECK(c.abs_lambda == 0.0);
    CHECK(c.periodicity_residual <= 1e-14);

    // l = a - b u* along a semitrivial orbit
    const auto s = support::line(16, Regime::DirichletType);
    const SystemSpec spec = support::constant_system(s, 1.0, 1.0, {2, 1.5, 1, 1, 1, 1});
    const PeriodicOrbit us = semitrivial_u(spec);
    const CoefficientField u = us.u_field();
    const CoefficientField l = combine(1.0, spec.coefficients.a1, -1.0, spec.coefficients.b1, &u);
    std::vector<Eigen::VectorXd> samples;
    for (const auto& x : us.slices().samples) samples.push_back(x.u);
    const ZeroLambdaCertificate cu = zero_lambda_certificate(s.op, 1.0, l, samples);
    CHECK(cu.abs_lambda < 1e-6);
    CHECK(cu.min_value > 0.0);
}

TEST_CASE("step-size guard on the linear map") {
    const auto s = support::line(16, Regime::NeumannType);
    CHECK_THROWS_AS(LinearPeriodMap(s.op, 1.0, support::constant(s.grid, 3.0), 1.0), NumericalError);
    CHECK_THROWS_AS(principal_spectrum_point(s.op, -1.0, support::constant(s.grid, 0.0)), ValidationError);
}
