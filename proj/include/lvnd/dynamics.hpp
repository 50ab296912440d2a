#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lvnd/domain.hpp"
#include "lvnd/fields.hpp"
#include "lvnd/rk4.hpp"

namespace lvnd {

/// Two-species competition system with nonlocal dispersal:
///
///     u_t = nu1 (K u - loss u) + u (a1 - b1 u - c1 v)
///     v_t = nu2 (K v - loss v) + v (a2 - b2 u - c2 v)
struct SystemSpec {
    Grid grid;
    std::shared_ptr<const DispersalOperator> dispersal;
    double nu1 = 1.0;
    double nu2 = 1.0;
    CoefficientSet coefficients;
    double period = 1.0;

    /// Checks rates, shapes, periods, and positivity of b and c on the mesh.
    void validate(int time_samples = 64) const;
    std::size_t size() const { return grid.size(); }
};

SystemSpec make_system(Grid grid, std::shared_ptr<const DispersalOperator> dispersal, double nu1, double nu2,
                       CoefficientSet coefficients);

/// Default integrator step: T / 2000.
double default_dt(double period);

/// Step-size guidance 0.1 / (nu_max + sup|a| + 2 b_max u_max).
double stability_bound(const SystemSpec& spec, double u_max, int time_samples = 64);

inline constexpr double kClampThreshold = 1e-10;

struct Trajectory {
    std::vector<StateField> samples;
    double dt = 0.0;
    /// Samples cover exactly one period and the last one repeats the first.
    bool periodic = false;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

StateField rhs(const SystemSpec& spec, double t, const StateField& state);

/// Fixed-step RK4 integrator for one system, with coefficients tabulated on
/// the half-step mesh. Reuse one instance for repeated period maps.
class Propagator {
public:
    Propagator(const SystemSpec& spec, double dt);

    const SystemSpec& spec() const { return *spec_; }
    double dt() const { return dt_; }

    /// `samples` equispaced outputs after the initial state (samples >= 1).
    Trajectory integrate(const StateField& initial, double t0, double t1, int samples = 1);
    StateField advance(const StateField& initial, double t0, double t1);
    /// One period starting at initial.t.
    StateField period_map(const StateField& initial);

private:
    void evaluate(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy);
    void guard(double t, Eigen::VectorXd& y) const;

    std::shared_ptr<const SystemSpec> spec_;
    double dt_;
    std::size_t n_;
    FieldCache a1_, a2_, b1_, b2_, c1_, c2_;
    Eigen::VectorXd ku_, kv_;
    Rk4<Eigen::VectorXd> rk4_;
};

Trajectory integrate(const SystemSpec& spec, const StateField& initial, double t0, double t1, double dt,
                     int samples = 1);
StateField poincare_map(const SystemSpec& spec, const StateField& state_at_0, std::optional<double> dt = {});

enum class SolutionKind { Super, Sub };

struct SubSuperReport {
    double worst_violation = 0.0;   // > 0 means an inequality fails
    std::size_t sample = 0;
    std::size_t node = 0;
    int component = 0;              // 0: u inequality, 1: v inequality
    double tolerance = 0.0;
    bool satisfied = true;          // worst_violation <= tolerance
};

/// Defect check of a candidate trajectory against the super-solution (or
/// sub-solution) inequalities, with time derivatives from centred finite
/// differences on the trajectory's own sampling. The default tolerance is
/// 1e-4 * max(1, sup of the candidate).
SubSuperReport check_subsuper(const SystemSpec& spec, const Trajectory& candidate, SolutionKind kind,
                              std::optional<double> tolerance = {});

struct ComparisonReport {
    bool preserved = true;
    bool nonnegative = true;
    std::size_t sample = 0;
    std::size_t node = 0;
    int component = -1;
    double worst_slack = 0.0;
};

/// Integrate both pairs over [0, horizon] and check pair1 <=_2 pair2 at every sample.
ComparisonReport comparison_test(const SystemSpec& spec, const StateField& pair1, const StateField& pair2,
                                 double horizon, int samples, std::optional<double> dt = {},
                                 double slack = 1e-12);

}  // namespace lvnd
