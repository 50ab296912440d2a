#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvnd/dynamics.hpp"
#include "lvnd/fields.hpp"
#include "lvnd/spectral.hpp"

namespace lvnd {

enum class OrbitKind { SemitrivialU, SemitrivialV, Coexistence, Trivial };

std::string to_string(OrbitKind kind);

/// T-periodic solution stored over one period.
///
/// `slices` holds M + 1 equispaced states on [0, T] (the last repeats the
/// first). Values between slices come from periodic cubic Hermite
/// interpolation on the knot table, which uses the integrator step when that
/// fits in memory and the slices otherwise.
class PeriodicOrbit {
public:
    PeriodicOrbit() = default;

    double period() const { return period_; }
    std::size_t size() const { return initial().size(); }
    const Trajectory& slices() const { return slices_; }
    std::size_t slice_count() const { return slices_.samples.empty() ? 0 : slices_.samples.size() - 1; }

    /// Interpolated state at time t (taken modulo T).
    StateField at(double t) const;
    const StateField& initial() const { return slices_.samples.front(); }

    /// Orbit components as coefficient fields, e.g. for l = a - b u*.
    CoefficientField u_field() const;
    CoefficientField v_field() const;

    /// Dense trajectory on the knot table (periodic, last knot repeats the first).
    Trajectory knot_trajectory() const;

    double residual = 0.0;      // ||P(state0) - state0||_sup
    OrbitKind kind = OrbitKind::Trivial;
    long periods = 0;           // Poincare iterations used
    bool converged = false;     // false: cap reached, "unresolved"
    double positivity_floor = 0.0;
    double min_u = 0.0;
    double min_v = 0.0;
    double max_u = 0.0;
    double max_v = 0.0;

private:
    friend PeriodicOrbit build_orbit(Propagator&, const StateField&, int, double);

    struct Knots {
        double period = 1.0;
        double step = 1.0;
        std::vector<Eigen::VectorXd> u, v, du, dv;   // one entry per knot, the last knot excluded

        void interpolate(double t, int component, Eigen::VectorXd& out) const;
    };

    double period_ = 1.0;
    Trajectory slices_;
    std::shared_ptr<const Knots> knots_;
};

/// Record one period of the solution through `state0` (at t = 0) as an orbit
/// with `slices` output slices and classify it against `positivity_floor`.
PeriodicOrbit build_orbit(Propagator& propagator, const StateField& state0, int slices, double positivity_floor);

struct OrbitOptions {
    std::optional<double> dt;
    double tolerance = 1e-9;     // successive period-map difference
    long max_periods = 10000;
    int slices = 200;
    double monotone_slack = 1e-9;
    double positivity_floor = -1.0;  // < 0: 1e-8 * amplitude
};

/// Scenario amplitude max(a1M / b1L, a2M / c2L), used for the positivity floor.
double amplitude(const CoefficientBounds& bounds);

/// Positive periodic solution of u_t = nu (K u - loss u) + u (a - b u) by
/// monotone Poincare iteration down from a_M / b_L + 1. The orbit is stored
/// in the u component with v = 0.
PeriodicOrbit solve_scalar_periodic(const Grid& grid, std::shared_ptr<const DispersalOperator> op, double nu,
                                    const CoefficientField& a, const CoefficientField& b,
                                    const OrbitOptions& options = {});

/// Semitrivial orbits (u*, 0) and (0, v*) of a system.
PeriodicOrbit semitrivial_u(const SystemSpec& spec, const OrbitOptions& options = {});
PeriodicOrbit semitrivial_v(const SystemSpec& spec, const OrbitOptions& options = {});

/// Poincare iteration from `start` until successive iterates differ by less
/// than the tolerance. With `monotone` set, each iterate must move in the
/// given direction of the competitive order (1: decreasing, -1: increasing).
PeriodicOrbit iterate_to_orbit(Propagator& propagator, const StateField& start, const OrbitOptions& options,
                               double positivity_floor, int monotone = 0);

enum class Prediction { Coexistence, UWins, VWins, Inconclusive };

std::string to_string(Prediction p);

struct Hypothesis {
    bool holds = false;
    std::vector<double> margins;     // literal slack of each inequality
};

struct CriteriaReport {
    CoefficientBounds bounds;
    double lambda0 = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    Regime regime = Regime::NeumannType;
    Hypothesis standing;   // a1L > -nu1 lambda0, a2L > -nu2 lambda0
    Hypothesis a1, a2, a3, b1, b2;
    Prediction prediction = Prediction::Inconclusive;
};

/// Evaluates the coexistence and extinction inequalities literally. The
/// per-time conditions of A(2) are checked on `time_samples` mesh times.
CriteriaReport evaluate_criteria(const SystemSpec& spec, const CoefficientBounds& bounds, double lambda0,
                                 int time_samples = 256);

struct CornerReport {
    double epsilon = 0.0;
    std::string construction;        // "perron" or "semitrivial"
    SubSuperReport check;
    bool checked = false;
};

struct CoexistenceResult {
    PeriodicOrbit plus;              // from (u*(0), eps phi*)
    PeriodicOrbit minus;             // from (eps psi*, v*(0))
    CornerReport plus_corner;
    CornerReport minus_corner;
    double gap = 0.0;                // sup distance between the two limits at t = 0
    bool sandwich = false;           // minus <=_2 plus at every slice
};

struct CoexistenceOptions {
    OrbitOptions orbit;
    std::optional<double> epsilon;   // explicit epsilon for both corners (0 allowed)
    bool verify_corners = true;
};

/// Two-corner monotone iteration for coexistence states.
CoexistenceResult coexistence_iterate(const SystemSpec& spec, const PeriodicOrbit& u_star,
                                      const PeriodicOrbit& v_star, const CoexistenceOptions& options = {});

struct UniquenessReport {
    double ratio = 0.0;                 // (b1 - b2) / (c2 - c1)
    double relation_error = 0.0;        // ||v** - ratio u**||_sup / ||u**||_sup
    double reduced_residual = 0.0;      // Poincare residual of u** in the reduced scalar equation
    double theta_u_error = 0.0;         // ||u* - theta*/b1||_sup (when supplied)
    double theta_v_error = 0.0;         // ||v* - theta*/c2||_sup (when supplied)
    bool relation_ok = false;
    bool reduced_ok = false;
    bool theta_ok = true;
};

/// Checks the A(3) identities for a coexistence orbit. The semitrivial
/// orbits and theta* are optional.
UniquenessReport uniqueness_check_A3(const SystemSpec& spec, const PeriodicOrbit& orbit,
                                     const PeriodicOrbit* u_star = nullptr, const PeriodicOrbit* v_star = nullptr,
                                     const PeriodicOrbit* theta = nullptr, std::optional<double> dt = {});

enum class ExtinctSpecies { V, U };

struct ExtinctionOptions {
    std::optional<double> dt;
    long max_periods = 200;
    double extinction_tol = 1e-6;
    int samples_per_period = 10;
    double sandwich_slack = 1e-12;
    ExtinctSpecies species = ExtinctSpecies::V;
};

struct ExtinctionReport {
    bool extinct = false;
    long periods = 0;
    double final_sup_extinct = 0.0;       // sup of the vanishing component
    std::vector<double> survivor_distance;  // ||survivor(nT) - survivor*(0)||_sup per period
    double final_distance = 0.0;
    bool sandwich_preserved = true;
    double sandwich_worst_slack = 0.0;
    std::size_t sandwich_samples = 0;
};

/// Integrates from `initial` until the losing species falls below the
/// extinction tolerance, comparing against the constant-coefficient
/// sandwich system at every sample.
ExtinctionReport extinction_run(const SystemSpec& spec, const StateField& initial, const PeriodicOrbit& survivor,
                                const ExtinctionOptions& options = {});

}  // namespace lvnd
