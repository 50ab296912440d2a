#include <doctest.h>

#include <cmath>
#include <vector>

#include "lvnd/domain.hpp"
#include "lvnd/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lvnd;

namespace {

Grid grid1(double length, int n, Regime r) {
    const std::vector<double> e{length};
    const std::vector<int> c{n};
    return build_grid(1, e, c, r);
}

Grid grid2(double lx, double ly, int nx, int ny, Regime r) {
    const std::vector<double> e{lx, ly};
    const std::vector<int> c{nx, ny};
    return build_grid(2, e, c, r);
}

}  // namespace

TEST_CASE("grid weights partition the domain") {
    const Grid g = grid1(2.0, 8, Regime::NeumannType);
    CHECK(g.size() == 8);
    for (Eigen::Index i = 0; i < 8; ++i) CHECK(g.weights()[i] == doctest::Approx(0.25));
    CHECK(g.weights().sum() == doctest::Approx(2.0));
    CHECK(g.node(0).x == doctest::Approx(-0.875));
    CHECK(g.node(7).x == doctest::Approx(0.875));

    const Grid sq = grid2(1.0, 1.0, 4, 4, Regime::DirichletType);
    CHECK(sq.size() == 16);
    for (Eigen::Index i = 0; i < 16; ++i) CHECK(sq.weights()[i] == doctest::Approx(1.0 / 16));
    // ix + nx * iy
    CHECK(sq.lattice_index(6)[0] == 2);
    CHECK(sq.lattice_index(6)[1] == 1);
}

TEST_CASE("periodic grid uses the wrap-around metric") {
    const Grid g = grid1(1.0, 3, Regime::Periodic);
    CHECK(g.size() == 3);
    CHECK(g.distance(0, 2) == doctest::Approx(1.0 / 3));
    CHECK(g.distance(0, 1) == doctest::Approx(1.0 / 3));
    const Grid n = grid1(1.0, 3, Regime::NeumannType);
    CHECK(n.distance(0, 2) == doctest::Approx(2.0 / 3));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(grid1(2.0, 2, Regime::NeumannType), ValidationError);
    CHECK_THROWS_AS(grid1(-1.0, 8, Regime::NeumannType), ValidationError);
    CHECK_THROWS_AS(parse_regime("robin"), ValidationError);
    CHECK(parse_regime("periodic") == Regime::Periodic);
}

TEST_CASE("kernel on 64 nodes has unit discrete mass") {
    const Grid g = grid1(2.0, 64, Regime::NeumannType);
    const Kernel k = build_kernel(g, 0.5, KernelProfile::SmoothBump);
    CHECK(k.reach(0) == 16);
    CHECK(k.at(16) == 0.0);
    CHECK(k.at(15) > 0.0);
    CHECK(std::abs(k.discrete_mass() - 1.0) <= 1e-15);

    // independent normalization by direct summation
    const double h = g.spacing(0);
    double raw = 0.0;
    for (int m = -20; m <= 20; ++m) raw += oracle::bump(std::abs(m * h) / 0.5);
    for (int m = 0; m <= 16; ++m) {
        CHECK(k.at(m) == doctest::Approx(oracle::bump(m * h / 0.5) / (raw * h)).epsilon(1e-13));
    }
}

TEST_CASE("kernel samples are symmetric") {
    const Grid g = grid2(2.0, 1.0, 12, 6, Regime::Periodic);
    const Kernel k = build_kernel(g, 0.4, KernelProfile::Cosine);
    for (int a = -k.reach(0); a <= k.reach(0); ++a) {
        for (int b = -k.reach(1); b <= k.reach(1); ++b) {
            CHECK(k.at(a, b) == k.at(-a, -b));
            CHECK(k.at(a, b) == k.at(-a, b));
        }
    }
    CHECK(std::abs(k.discrete_mass() - 1.0) <= 1e-14);
}

TEST_CASE("cosine kernel with radius two spacings is a 3-point stencil") {
    const Grid g = grid1(2.0, 20, Regime::NeumannType);
    const double h = g.spacing(0);
    const Kernel k = build_kernel(g, 2.0 * h, KernelProfile::Cosine);
    CHECK(k.support_size() == 3);
    // samples 1, 1/2, 1/2 (cos at s = 0, 1/2), normalized to cell-weighted sum 1
    CHECK(k.at(0) * h == doctest::Approx(0.5));
    CHECK(k.at(1) * h == doctest::Approx(0.25));
    CHECK(k.at(2) == 0.0);
}

TEST_CASE("kernel radius must exceed the spacing") {
    const Grid g = grid1(2.0, 8, Regime::NeumannType);
    CHECK_THROWS_AS(build_kernel(g, 0.25, KernelProfile::Cosine), ValidationError);
    CHECK_THROWS_AS(build_kernel(g, 0.1, KernelProfile::Cosine), ValidationError);
    CHECK_NOTHROW(build_kernel(g, 0.3, KernelProfile::Cosine));
}

TEST_CASE("constants are annihilated under NeumannType and Periodic") {
    for (Regime r : {Regime::NeumannType, Regime::Periodic}) {
        const auto s = support::line(33, r, 2.0, 0.45);
        const Eigen::VectorXd out = s.op->apply(Eigen::VectorXd::Ones(33));
        CHECK(out.cwiseAbs().maxCoeff() == 0.0);
        CHECK(s.op->row_sums().cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("DirichletType on constants gives in-domain mass minus one") {
    const auto s = support::line(8, Regime::DirichletType, 2.0, 0.6);
    const Eigen::VectorXd out = s.op->apply(Eigen::VectorXd::Ones(8));
    const Eigen::MatrixXd ref = oracle::brute_force_matrix(s.grid, 0.6, true, Regime::DirichletType);
    for (Eigen::Index i = 0; i < 8; ++i) {
        CHECK(out[i] <= 1e-15);
        CHECK(out[i] == doctest::Approx(ref.row(i).sum()).epsilon(1e-13));
    }
    CHECK(out[0] < -1e-3);
    CHECK(out[7] < -1e-3);
}

TEST_CASE("operator matches the brute-force double loop") {
    support::Rng rng(7);
    for (Regime r : {Regime::DirichletType, Regime::NeumannType, Regime::Periodic}) {
        for (bool smooth : {true, false}) {
            const auto prof = smooth ? KernelProfile::SmoothBump : KernelProfile::Cosine;
            {
                const auto s = support::line(64, r, 2.0, 0.5, prof);
                const Eigen::MatrixXd ref = oracle::brute_force_matrix(s.grid, 0.5, smooth, r);
                CHECK((s.op->matrix() - ref).cwiseAbs().maxCoeff() <= 1e-13);
                const Eigen::VectorXd u = rng.vector(64, 0.0, 2.0);
                CHECK((s.op->apply(u) - ref * u).cwiseAbs().maxCoeff() <= 1e-13);
            }
            {
                const Grid g = grid2(2.0, 1.5, 8, 6, r);
                const auto op = assemble_dispersal(g, build_kernel(g, 0.7, prof), r);
                const Eigen::MatrixXd ref = oracle::brute_force_matrix(g, 0.7, smooth, r);
                CHECK((op.matrix() - ref).cwiseAbs().maxCoeff() <= 1e-13);
            }
        }
    }
}

TEST_CASE("operator is Metzler with symmetric convolution part") {
    for (Regime r : {Regime::DirichletType, Regime::NeumannType, Regime::Periodic}) {
        const auto s = support::line(24, r, 2.0, 0.5);
        const Eigen::MatrixXd& k = s.op->convolution();
        CHECK(k.minCoeff() >= 0.0);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::MatrixXd a = s.op->matrix();
        const double shift = -a.diagonal().minCoeff();
        const Eigen::MatrixXd shifted = a + shift * Eigen::MatrixXd::Identity(24, 24);
        CHECK(shifted.minCoeff() >= 0.0);
    }
}

TEST_CASE("diagonal field per regime") {
    const auto d = support::line(16, Regime::DirichletType);
    const auto n = support::line(16, Regime::NeumannType);
    const auto p = support::line(16, Regime::Periodic);
    CHECK(d.op->diagonal_field().maxCoeff() == -1.0);
    CHECK(p.op->diagonal_field().minCoeff() == -1.0);
    CHECK((n.op->diagonal_field() + n.op->loss()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(n.op->loss().maxCoeff() <= 1.0 + 1e-14);
    CHECK(n.op->loss().minCoeff() < 0.9);
}
