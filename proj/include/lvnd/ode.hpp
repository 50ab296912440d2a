#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lvnd/dynamics.hpp"
#include "lvnd/fields.hpp"
#include "lvnd/periodic.hpp"

namespace lvnd {

/// Planar competition system with positive forcing,
///
///     u' = u (a1 - b1 u - c1 v) + d1
///     v' = v (a2 - b2 u - c2 v) + d2,
///
/// with T-periodic scalar coefficients tabulated on the half-step mesh of an
/// RK4 integrator with `steps` steps per period.
struct ForcedPlanarSystem {
    enum Coefficient { A1, A2, B1, B2, C1, C2, D1, D2 };
    using Sampler = std::function<std::array<double, 8>(double t)>;

    double period = 1.0;
    int steps = 20000;
    std::array<std::vector<double>, 8> table;   // 2 * steps samples each

    static ForcedPlanarSystem tabulate(double period, const Sampler& sampler, int steps = 20000);
    static ForcedPlanarSystem constant(double period, const std::array<double, 8>& values, int steps = 20000);

    /// Checks finiteness and positivity of b, c, d.
    void validate() const;
    Range range(Coefficient c) const;
    /// b1L / b2M - c1M / c2L; positive when the uniqueness ratio condition holds.
    double ratio_margin() const;
};

struct PlanarOrbit {
    std::vector<double> t, u, v;   // slices + 1 samples on [0, T]
};

struct Lemma31Options {
    double tolerance = 1e-12;
    long max_periods = 10000;
    int slices = 200;
    double monotone_slack = 1e-10;
};

struct Lemma31Result {
    PlanarOrbit orbit;           // limit from (u*(0), 0)
    PlanarOrbit lower;           // limit from (0, v*(0))
    double gap = 0.0;            // sup over slices of the distance between the two limits
    double u_star0 = 0.0;        // forced-logistic periodic solutions at t = 0
    double v_star0 = 0.0;
    double aux_residual = 0.0;   // Poincare residual of u*, v*
    double residual = 0.0;       // Poincare residual of the returned orbit
    long periods_upper = 0;
    long periods_lower = 0;
    bool converged = false;
    double ratio_margin = 0.0;
};

/// Periodic solution of the forced planar system by two-corner monotone
/// iteration of the Poincare map.
Lemma31Result lemma31_periodic(const ForcedPlanarSystem& system, const Lemma31Options& options = {});

/// Scalar forced logistic w' = w (a - b w) + d: periodic solution at t = 0
/// and its Poincare residual.
std::pair<double, double> forced_logistic_periodic(const ForcedPlanarSystem& system, int species,
                                                   double tolerance = 1e-13, long max_periods = 100000);

struct ReconstructionReport {
    std::size_t node = 0;
    bool ratio_ok = false;
    double ratio_margin = 0.0;   // per-node ratio condition slack
    double deviation = 0.0;      // sup over slices of |planar - orbit| at the node
    bool solved = false;
    Lemma31Result planar;
};

struct ReconstructionOptions {
    int steps = 20000;
    Lemma31Options lemma;
    int time_samples = 256;      // mesh for the per-node ratio condition
};

/// Rebuilds the orbit value at one node from the planar system with growth
/// a_i - nu_i loss and forcing nu_i (K orbit)(t, node).
ReconstructionReport reconstruct_pointwise(const SystemSpec& spec, const PeriodicOrbit& orbit, std::size_t node,
                                           const ReconstructionOptions& options = {});

struct ReconstructionSweep {
    std::vector<ReconstructionReport> nodes;
    double max_deviation = 0.0;
    std::size_t ratio_failures = 0;
};

ReconstructionSweep reconstruct_all(const SystemSpec& spec, const PeriodicOrbit& orbit,
                                    const ReconstructionOptions& options = {});

}  // namespace lvnd
