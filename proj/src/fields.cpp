#include "lvnd/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lvnd/error.hpp"

namespace lvnd {

CoefficientField::CoefficientField(double period, std::size_t nodes, NodalEvaluator evaluator, bool time_dependent,
                                   bool space_dependent, std::string description)
    : period_(period),
      nodes_(nodes),
      evaluator_(std::move(evaluator)),
      time_dependent_(time_dependent),
      space_dependent_(space_dependent),
      description_(std::move(description)) {
    if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("coefficient period must be positive");
}

CoefficientField CoefficientField::constant(std::size_t nodes, double period, double value) {
    return CoefficientField(
        period, nodes, [value](double, Eigen::VectorXd& out) { out.setConstant(value); }, false, false,
        std::to_string(value));
}

CoefficientField CoefficientField::pointwise(const Grid& grid, double period, std::function<double(double, Point)> f,
                                             bool time_dependent, bool space_dependent, std::string description) {
    std::vector<Point> nodes = grid.nodes();
    auto eval = [nodes = std::move(nodes), f = std::move(f)](double t, Eigen::VectorXd& out) {
        for (std::size_t i = 0; i < nodes.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(t, nodes[i]);
    };
    return CoefficientField(period, grid.size(), std::move(eval), time_dependent, space_dependent,
                            std::move(description));
}

CoefficientField CoefficientField::from_expression(const Grid& grid, double period, const Expression& expr) {
    if (!expr.depends_on_space()) {
        return CoefficientField(
            period, grid.size(), [expr](double t, Eigen::VectorXd& out) { out.setConstant(expr(t, 0.0, 0.0)); },
            expr.depends_on_time(), false, expr.text());
    }
    return pointwise(
        grid, period, [expr](double t, Point p) { return expr(t, p.x, p.y); }, expr.depends_on_time(), true,
        expr.text());
}

CoefficientField CoefficientField::frozen(double period, const Eigen::VectorXd& values, std::string description) {
    return CoefficientField(
        period, static_cast<std::size_t>(values.size()), [values](double, Eigen::VectorXd& out) { out = values; },
        false, true, std::move(description));
}

void CoefficientField::evaluate(double t, Eigen::VectorXd& out) const {
    if (out.size() != static_cast<Eigen::Index>(nodes_)) out.resize(static_cast<Eigen::Index>(nodes_));
    evaluator_(t, out);
}

Eigen::VectorXd CoefficientField::at(double t) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(nodes_));
    evaluator_(t, out);
    return out;
}

CoefficientField CoefficientField::shifted(double c) const {
    auto inner = evaluator_;
    return CoefficientField(
        period_, nodes_,
        [inner, c](double t, Eigen::VectorXd& out) {
            inner(t, out);
            out.array() += c;
        },
        time_dependent_, space_dependent_, description_ + " + " + std::to_string(c));
}

CoefficientField combine(double alpha, const CoefficientField& f, double beta, const CoefficientField& g,
                         const CoefficientField* h) {
    if (f.size() != g.size() || (h != nullptr && h->size() != f.size())) {
        throw ValidationError("combined fields live on different grids");
    }
    std::optional<CoefficientField> hh;
    if (h != nullptr) hh = *h;
    const std::size_t n = f.size();
    auto eval = [alpha, beta, f, g, hh, n](double t, Eigen::VectorXd& out) {
        Eigen::VectorXd gv(static_cast<Eigen::Index>(n));
        f.evaluate(t, out);
        g.evaluate(t, gv);
        if (hh) {
            Eigen::VectorXd hv(static_cast<Eigen::Index>(n));
            hh->evaluate(t, hv);
            out = alpha * out + beta * gv.cwiseProduct(hv);
        } else {
            out = alpha * out + beta * gv;
        }
    };
    const bool td = f.time_dependent() || g.time_dependent() || (h != nullptr && h->time_dependent());
    const bool sd = f.space_dependent() || g.space_dependent() || (h != nullptr && h->space_dependent());
    return CoefficientField(f.period(), n, std::move(eval), td, sd, "combination");
}

// ---------------------------------------------------------------------------

FieldCache::FieldCache(const CoefficientField& field, double dt, std::size_t max_entries)
    : field_(&field), period_(field.period()) {
    scratch_.resize(static_cast<Eigen::Index>(field.size()));
    if (!field.time_dependent()) {
        table_.push_back(field.at(0.0));
        return;
    }
    const double steps = period_ / dt;
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * steps) return;
    slots_ = 2 * static_cast<long>(rounded);
    if (static_cast<std::size_t>(slots_) * field.size() > max_entries) {
        slots_ = 0;
        return;
    }
    half_step_ = period_ / static_cast<double>(slots_);
    table_.reserve(static_cast<std::size_t>(slots_));
    for (long j = 0; j < slots_; ++j) table_.push_back(field.at(static_cast<double>(j) * half_step_));
}

const Eigen::VectorXd& FieldCache::at(double t) {
    if (!field_->time_dependent()) return table_.front();
    if (slots_ > 0) {
        const double phase = t / half_step_;
        const double j = std::round(phase);
        if (std::abs(phase - j) < 1e-6) {
            long idx = static_cast<long>(j) % slots_;
            if (idx < 0) idx += slots_;
            return table_[static_cast<std::size_t>(idx)];
        }
    }
    field_->evaluate(t, scratch_);
    return scratch_;
}

// ---------------------------------------------------------------------------

Range field_range(const CoefficientField& field, int time_samples) {
    if (time_samples < 1) throw ValidationError("time_samples must be positive");
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const int samples = field.time_dependent() ? time_samples : 1;
    Eigen::VectorXd values(static_cast<Eigen::Index>(field.size()));
    for (int k = 0; k < samples; ++k) {
        field.evaluate(field.period() * k / samples, values);
        if (!values.allFinite()) {
            throw NonFiniteError("coefficient '" + field.description() + "' is not finite at t = " +
                                 std::to_string(field.period() * k / samples));
        }
        r.lower = std::min(r.lower, values.minCoeff());
        r.upper = std::max(r.upper, values.maxCoeff());
    }
    return r;
}

CoefficientBounds compute_bounds(const CoefficientSet& c, int time_samples) {
    if (time_samples < 64) throw ValidationError("compute_bounds needs at least 64 time samples per period");
    CoefficientBounds b{field_range(c.a1, time_samples), field_range(c.a2, time_samples),
                        field_range(c.b1, time_samples), field_range(c.b2, time_samples),
                        field_range(c.c1, time_samples), field_range(c.c2, time_samples)};
    for (const Range* r : {&b.b1, &b.b2, &b.c1, &b.c2}) {
        if (!(r->lower > 0.0)) throw ValidationError("self-regulation and competition coefficients must be positive");
    }
    return b;
}

Eigen::VectorXd time_average(const CoefficientField& field, int time_samples) {
    if (!field.time_dependent()) return field.at(0.0);
    if (time_samples < 2) throw ValidationError("time_average needs at least 2 samples");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(field.size()));
    Eigen::VectorXd values(static_cast<Eigen::Index>(field.size()));
    // Trapezoid on a periodic mesh: end points coincide, every node gets weight 1/n.
    for (int k = 0; k < time_samples; ++k) {
        field.evaluate(field.period() * k / time_samples, values);
        if (!values.allFinite()) throw NonFiniteError("time_average: non-finite sample");
        sum += values;
    }
    return sum / time_samples;
}

// ---------------------------------------------------------------------------

double sup_norm(const Eigen::VectorXd& x) {
    return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

double sup_distance(const StateField& a, const StateField& b) {
    return std::max(sup_norm(a.u - b.u), sup_norm(a.v - b.v));
}

OrderResult order_compare(const StateField& pair1, const StateField& pair2, Order order, double slack) {
    if (pair1.u.size() != pair2.u.size() || pair1.v.size() != pair2.v.size() || pair1.u.size() != pair1.v.size()) {
        throw ValidationError("order_compare: fields live on different grids");
    }
    const bool competitive = order == Order::Order2 || order == Order::StrictOrder2;
    const bool strict = order == Order::StrictOrder1 || order == Order::StrictOrder2;

    OrderResult result;
    result.worst_slack = std::numeric_limits<double>::infinity();
    const Eigen::Index n = pair1.u.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double su = pair2.u[i] - pair1.u[i];
        const double sv = competitive ? pair1.v[i] - pair2.v[i] : pair2.v[i] - pair1.v[i];
        for (int c = 0; c < 2; ++c) {
            const double s = c == 0 ? su : sv;
            result.worst_slack = std::min(result.worst_slack, s);
            const bool ok = strict ? s > 0.0 : s >= -slack;
            if (!ok && result.holds) {
                result.holds = false;
                result.fails_at = static_cast<std::size_t>(i);
                result.component = c;
            }
        }
    }
    if (n == 0) result.worst_slack = 0.0;
    return result;
}

}  // namespace lvnd
