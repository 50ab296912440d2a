// Shared fixtures for the unit tests and the acceptance runner.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "lvnd/domain.hpp"
#include "lvnd/dynamics.hpp"
#include "lvnd/fields.hpp"

namespace support {

/// SplitMix64; small, seedable, and identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

    Eigen::VectorXd vector(std::size_t n, double lo, double hi) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::uint64_t state_;
};

struct Setup {
    lvnd::Grid grid;
    std::shared_ptr<const lvnd::DispersalOperator> op;
};

inline Setup line(int n, lvnd::Regime regime, double length = 2.0, double radius = 0.5,
                  lvnd::KernelProfile profile = lvnd::KernelProfile::SmoothBump) {
    const std::vector<double> ext{length};
    const std::vector<int> nodes{n};
    lvnd::Grid g = lvnd::build_grid(1, ext, nodes, regime);
    auto op = std::make_shared<const lvnd::DispersalOperator>(
        lvnd::assemble_dispersal(g, lvnd::build_kernel(g, radius, profile), regime));
    return {std::move(g), std::move(op)};
}

inline lvnd::CoefficientField constant(const lvnd::Grid& g, double value, double period = 1.0) {
    return lvnd::CoefficientField::constant(g.size(), period, value);
}

/// System with constant coefficients {a1, a2, b1, b2, c1, c2}.
inline lvnd::SystemSpec constant_system(const Setup& s, double nu1, double nu2, std::array<double, 6> k,
                                        double period = 1.0) {
    lvnd::CoefficientSet set{constant(s.grid, k[0], period), constant(s.grid, k[1], period),
                             constant(s.grid, k[2], period), constant(s.grid, k[3], period),
                             constant(s.grid, k[4], period), constant(s.grid, k[5], period)};
    return lvnd::make_system(s.grid, s.op, nu1, nu2, std::move(set));
}

inline lvnd::StateField state(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double t = 0.0) {
    return lvnd::StateField{u, v, t};
}

inline lvnd::StateField uniform_state(std::size_t n, double u, double v) {
    const auto m = static_cast<Eigen::Index>(n);
    return lvnd::StateField{Eigen::VectorXd::Constant(m, u), Eigen::VectorXd::Constant(m, v), 0.0};
}

}  // namespace support
