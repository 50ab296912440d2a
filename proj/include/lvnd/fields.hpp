#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvnd/domain.hpp"
#include "lvnd/expression.hpp"

namespace lvnd {

/// T-periodic coefficient sampled at the grid nodes.
///
/// The evaluator writes the nodal values at time t into a preallocated
/// vector. Fields built from closed-form expressions, orbits, or arbitrary
/// callables all share this representation.
class CoefficientField {
public:
    using NodalEvaluator = std::function<void(double t, Eigen::VectorXd& out)>;

    CoefficientField() = default;
    CoefficientField(double period, std::size_t nodes, NodalEvaluator evaluator, bool time_dependent,
                     bool space_dependent, std::string description = {});

    static CoefficientField constant(std::size_t nodes, double period, double value);
    static CoefficientField pointwise(const Grid& grid, double period, std::function<double(double, Point)> f,
                                      bool time_dependent = true, bool space_dependent = true,
                                      std::string description = {});
    static CoefficientField from_expression(const Grid& grid, double period, const Expression& expr);
    /// Time-independent field with the given nodal values.
    static CoefficientField frozen(double period, const Eigen::VectorXd& values, std::string description = {});

    double period() const { return period_; }
    std::size_t size() const { return nodes_; }
    bool time_dependent() const { return time_dependent_; }
    bool space_dependent() const { return space_dependent_; }
    const std::string& description() const { return description_; }

    void evaluate(double t, Eigen::VectorXd& out) const;
    Eigen::VectorXd at(double t) const;

    /// this + c, pointwise.
    CoefficientField shifted(double c) const;

private:
    double period_ = 1.0;
    std::size_t nodes_ = 0;
    NodalEvaluator evaluator_;
    bool time_dependent_ = false;
    bool space_dependent_ = false;
    std::string description_;
};

/// Pointwise combination alpha * f + beta * g * h, with h optional (h = 1).
CoefficientField combine(double alpha, const CoefficientField& f, double beta, const CoefficientField& g,
                         const CoefficientField* h = nullptr);

/// Nodal values of a field on the half-step mesh of a fixed-step integrator.
///
/// RK4 with step dt evaluates coefficients at multiples of dt/2. When the
/// period is an integer number of steps the values are tabulated once per
/// period; lookups off the mesh fall back to direct evaluation.
class FieldCache {
public:
    FieldCache(const CoefficientField& field, double dt, std::size_t max_entries = std::size_t{1} << 22);

    const Eigen::VectorXd& at(double t);
    bool tabulated() const { return !table_.empty(); }

private:
    const CoefficientField* field_;
    double period_;
    double half_step_ = 0.0;
    long slots_ = 0;
    std::vector<Eigen::VectorXd> table_;
    Eigen::VectorXd scratch_;
};

struct Range {
    double lower = 0.0;
    double upper = 0.0;
};

/// Mesh extrema (min, max) over nodes and `time_samples` equispaced times in one period.
Range field_range(const CoefficientField& field, int time_samples);

/// Lower/upper bounds a_iL, a_iM, ... of the six competition coefficients.
struct CoefficientBounds {
    Range a1, a2, b1, b2, c1, c2;
};

struct CoefficientSet {
    CoefficientField a1, a2, b1, b2, c1, c2;
};

/// Mesh approximation of the infimum/supremum over space-time.
CoefficientBounds compute_bounds(const CoefficientSet& coefficients, int time_samples);

/// Periodic trapezoid average over one period, per node.
Eigen::VectorXd time_average(const CoefficientField& field, int time_samples = 256);

/// Population densities of both species at the grid nodes.
struct StateField {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double t = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(u.size()); }
    bool finite() const { return u.allFinite() && v.allFinite(); }
    bool nonnegative() const { return (u.array() >= 0.0).all() && (v.array() >= 0.0).all(); }
};

double sup_norm(const Eigen::VectorXd& x);
double sup_distance(const StateField& a, const StateField& b);

/// Order1 is the componentwise order, Order2 the competitive order
/// (u1 <= u2 and v1 >= v2). Strict variants require strict inequality at every node.
enum class Order { Order1, Order2, StrictOrder1, StrictOrder2 };

struct OrderResult {
    bool holds = true;
    std::optional<std::size_t> fails_at;   // node of the first violation
    int component = -1;                    // 0 for u, 1 for v
    double worst_slack = 0.0;              // most negative slack over all nodes (0 if none)
};

/// Compare pair1 against pair2. `slack` relaxes non-strict inequalities.
OrderResult order_compare(const StateField& pair1, const StateField& pair2, Order order, double slack = 0.0);

}  // namespace lvnd
