#include "lvnd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvnd/error.hpp"

namespace lvnd {

void SystemSpec::validate(int time_samples) const {
    if (!dispersal) throw ValidationError("system has no dispersal operator");
    if (dispersal->size() != grid.size()) throw ValidationError("dispersal operator does not match the grid");
    if (!(nu1 > 0.0) || !(nu2 > 0.0)) throw ValidationError("dispersal rates nu1, nu2 must be positive");
    if (!(period > 0.0)) throw ValidationError("period must be positive");
    const CoefficientField* all[] = {&coefficients.a1, &coefficients.a2, &coefficients.b1,
                                     &coefficients.b2, &coefficients.c1, &coefficients.c2};
    for (const CoefficientField* f : all) {
        if (f->size() != grid.size()) throw ValidationError("coefficient field does not match the grid");
        if (std::abs(f->period() - period) > 1e-12 * period) {
            throw ValidationError("all coefficients must share the system period");
        }
    }
    compute_bounds(coefficients, time_samples);
}

SystemSpec make_system(Grid grid, std::shared_ptr<const DispersalOperator> dispersal, double nu1, double nu2,
                       CoefficientSet coefficients) {
    SystemSpec spec{std::move(grid), std::move(dispersal), nu1, nu2, std::move(coefficients), 1.0};
    spec.period = spec.coefficients.a1.period();
    spec.validate();
    return spec;
}

double default_dt(double period) {
    return period / 2000.0;
}

double stability_bound(const SystemSpec& spec, double u_max, int time_samples) {
    const auto& c = spec.coefficients;
    const double a_sup = std::max({std::abs(field_range(c.a1, time_samples).lower),
                                   std::abs(field_range(c.a1, time_samples).upper),
                                   std::abs(field_range(c.a2, time_samples).lower),
                                   std::abs(field_range(c.a2, time_samples).upper)});
    const double b_max = std::max({field_range(c.b1, time_samples).upper, field_range(c.b2, time_samples).upper,
                                   field_range(c.c1, time_samples).upper, field_range(c.c2, time_samples).upper});
    return 0.1 / (std::max(spec.nu1, spec.nu2) + a_sup + 2.0 * b_max * u_max);
}

StateField rhs(const SystemSpec& spec, double t, const StateField& s) {
    const auto& c = spec.coefficients;
    const DispersalOperator& op = *spec.dispersal;
    StateField d;
    d.t = t;
    const Eigen::VectorXd a1 = c.a1.at(t), a2 = c.a2.at(t), b1 = c.b1.at(t), b2 = c.b2.at(t), c1 = c.c1.at(t),
                          c2 = c.c2.at(t);
    d.u = spec.nu1 * op.apply(s.u) +
          s.u.cwiseProduct(a1 - b1.cwiseProduct(s.u) - c1.cwiseProduct(s.v));
    d.v = spec.nu2 * op.apply(s.v) +
          s.v.cwiseProduct(a2 - b2.cwiseProduct(s.u) - c2.cwiseProduct(s.v));
    return d;
}

// ---------------------------------------------------------------------------

Propagator::Propagator(const SystemSpec& spec, double dt)
    : spec_(std::make_shared<const SystemSpec>(spec)),
      dt_(dt),
      n_(spec.size()),
      a1_(spec_->coefficients.a1, dt),
      a2_(spec_->coefficients.a2, dt),
      b1_(spec_->coefficients.b1, dt),
      b2_(spec_->coefficients.b2, dt),
      c1_(spec_->coefficients.c1, dt),
      c2_(spec_->coefficients.c2, dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
    ku_.resize(static_cast<Eigen::Index>(n_));
    kv_.resize(static_cast<Eigen::Index>(n_));
}

void Propagator::evaluate(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const auto n = static_cast<Eigen::Index>(n_);
    const DispersalOperator& op = *spec_->dispersal;
    const auto u = y.head(n);
    const auto v = y.tail(n);
    ku_.noalias() = op.convolution() * u;
    kv_.noalias() = op.convolution() * v;
    const Eigen::VectorXd& a1 = a1_.at(t);
    const Eigen::VectorXd& b1 = b1_.at(t);
    const Eigen::VectorXd& c1 = c1_.at(t);
    dy.head(n) = spec_->nu1 * (ku_ - op.loss().cwiseProduct(u)) +
                 u.cwiseProduct(a1 - b1.cwiseProduct(u) - c1.cwiseProduct(v));
    const Eigen::VectorXd& a2 = a2_.at(t);
    const Eigen::VectorXd& b2 = b2_.at(t);
    const Eigen::VectorXd& c2 = c2_.at(t);
    dy.tail(n) = spec_->nu2 * (kv_ - op.loss().cwiseProduct(v)) +
                 v.cwiseProduct(a2 - b2.cwiseProduct(u) - c2.cwiseProduct(v));
}

void Propagator::guard(double t, Eigen::VectorXd& y) const {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double& value = y[i];
        if (!std::isfinite(value)) {
            std::ostringstream msg;
            msg << "non-finite state at t = " << t << ", node " << (i % static_cast<Eigen::Index>(n_));
            throw NonFiniteError(msg.str());
        }
        if (value < 0.0) {
            if (value < -kClampThreshold) {
                std::ostringstream msg;
                msg << "negative density " << value << " at t = " << t << ", node "
                    << (i % static_cast<Eigen::Index>(n_)) << " (" << (i < static_cast<Eigen::Index>(n_) ? "u" : "v")
                    << "); reduce dt";
                throw NegativityError(msg.str());
            }
            value = 0.0;
        }
    }
}

namespace {

Eigen::VectorXd stack(const StateField& s) {
    Eigen::VectorXd y(s.u.size() + s.v.size());
    y << s.u, s.v;
    return y;
}

StateField unstack(const Eigen::VectorXd& y, double t) {
    const Eigen::Index n = y.size() / 2;
    return StateField{y.head(n), y.tail(n), t};
}

}  // namespace

Trajectory Propagator::integrate(const StateField& initial, double t0, double t1, int samples) {
    if (initial.u.size() != static_cast<Eigen::Index>(n_) || initial.v.size() != static_cast<Eigen::Index>(n_)) {
        throw ValidationError("initial state does not match the grid");
    }
    if (!initial.finite()) throw NonFiniteError("initial state is not finite");
    if (!initial.nonnegative()) throw ValidationError("initial state must be nonnegative");
    if (samples < 1) throw ValidationError("integrate needs at least one output sample");
    if (!(t1 >= t0)) throw ValidationError("integrate: t1 must not precede t0");

    Trajectory traj;
    traj.dt = dt_;
    traj.samples.reserve(static_cast<std::size_t>(samples) + 1);
    Eigen::VectorXd y = stack(initial);
    traj.samples.push_back(unstack(y, t0));

    auto f = [this](double t, const Eigen::VectorXd& state, Eigen::VectorXd& d) { evaluate(t, state, d); };
    auto after = [this](double t, Eigen::VectorXd& state) { guard(t, state); };
    const double span = t1 - t0;
    for (int k = 0; k < samples; ++k) {
        const double a = t0 + span * k / samples;
        const double b = (k + 1 == samples) ? t1 : t0 + span * (k + 1) / samples;
        rk4_.advance(f, a, b, dt_, y, after);
        traj.samples.push_back(unstack(y, b));
    }
    return traj;
}

StateField Propagator::advance(const StateField& initial, double t0, double t1) {
    return integrate(initial, t0, t1, 1).samples.back();
}

StateField Propagator::period_map(const StateField& initial) {
    return advance(initial, initial.t, initial.t + spec_->period);
}

Trajectory integrate(const SystemSpec& spec, const StateField& initial, double t0, double t1, double dt,
                     int samples) {
    Propagator p(spec, dt);
    return p.integrate(initial, t0, t1, samples);
}

StateField poincare_map(const SystemSpec& spec, const StateField& state_at_0, std::optional<double> dt) {
    Propagator p(spec, dt.value_or(default_dt(spec.period)));
    return p.period_map(state_at_0);
}

// ---------------------------------------------------------------------------

namespace {

// Centred difference of component `which` at sample k. Uses the five-point
// stencil where available (wrapping for periodic trajectories), else three points.
Eigen::VectorXd time_derivative(const Trajectory& traj, std::size_t k, int which) {
    auto comp = [&](std::size_t j) -> const Eigen::VectorXd& {
        return which == 0 ? traj.samples[j].u : traj.samples[j].v;
    };
    const std::size_t n = traj.samples.size();
    if (traj.periodic) {
        const std::size_t m = n - 1;  // distinct samples
        const double h = traj.samples[1].t - traj.samples[0].t;
        auto at = [&](long j) -> const Eigen::VectorXd& {
            long w = j % static_cast<long>(m);
            if (w < 0) w += static_cast<long>(m);
            return comp(static_cast<std::size_t>(w));
        };
        const long kk = static_cast<long>(k);
        return (-at(kk + 2) + 8.0 * at(kk + 1) - 8.0 * at(kk - 1) + at(kk - 2)) / (12.0 * h);
    }
    if (k >= 2 && k + 2 < n) {
        const double h = (traj.samples[k + 2].t - traj.samples[k - 2].t) / 4.0;
        return (-comp(k + 2) + 8.0 * comp(k + 1) - 8.0 * comp(k - 1) + comp(k - 2)) / (12.0 * h);
    }
    return (comp(k + 1) - comp(k - 1)) / (traj.samples[k + 1].t - traj.samples[k - 1].t);
}

}  // namespace

SubSuperReport check_subsuper(const SystemSpec& spec, const Trajectory& candidate, SolutionKind kind,
                              std::optional<double> tolerance) {
    const std::size_t n = candidate.samples.size();
    if (n < 3) throw ValidationError("check_subsuper: trajectory too coarse in time");
    const double duration = candidate.samples.back().t - candidate.samples.front().t;
    const double per_period = static_cast<double>(n - 1) * spec.period / duration;
    if (!(duration > 0.0) || per_period < 16.0 - 1e-9) {
        throw ValidationError("check_subsuper: trajectory too coarse in time (fewer than 16 samples per period)");
    }
    double magnitude = 1.0;
    for (const auto& s : candidate.samples) {
        if (!s.nonnegative()) throw ValidationError("check_subsuper: candidate must be nonnegative");
        magnitude = std::max({magnitude, sup_norm(s.u), sup_norm(s.v)});
    }

    SubSuperReport report;
    report.tolerance = tolerance.value_or(1e-4 * magnitude);
    report.worst_violation = -std::numeric_limits<double>::infinity();

    const std::size_t first = candidate.periodic ? 0 : 1;
    const std::size_t last = candidate.periodic ? n - 1 : n - 1;  // exclusive
    const double sign = kind == SolutionKind::Super ? 1.0 : -1.0;
    for (std::size_t k = first; k < last; ++k) {
        const StateField& s = candidate.samples[k];
        const StateField f = rhs(spec, s.t, s);
        const Eigen::VectorXd du = time_derivative(candidate, k, 0) - f.u;
        const Eigen::VectorXd dv = time_derivative(candidate, k, 1) - f.v;
        // Super-solution: du >= 0 and dv <= 0. Violations are positive when the inequality fails.
        for (Eigen::Index i = 0; i < du.size(); ++i) {
            const double vu = -sign * du[i];
            const double vv = sign * dv[i];
            if (vu > report.worst_violation) {
                report.worst_violation = vu;
                report.sample = k;
                report.node = static_cast<std::size_t>(i);
                report.component = 0;
            }
            if (vv > report.worst_violation) {
                report.worst_violation = vv;
                report.sample = k;
                report.node = static_cast<std::size_t>(i);
                report.component = 1;
            }
        }
    }
    report.satisfied = report.worst_violation <= report.tolerance;
    return report;
}

ComparisonReport comparison_test(const SystemSpec& spec, const StateField& pair1, const StateField& pair2,
                                 double horizon, int samples, std::optional<double> dt, double slack) {
    if (!pair1.nonnegative() || !pair2.nonnegative()) throw ValidationError("comparison_test: pairs must be nonnegative");
    if (!order_compare(pair1, pair2, Order::Order2).holds) {
        throw ValidationError("comparison_test: precondition pair1 <=_2 pair2 violated");
    }
    Propagator p(spec, dt.value_or(default_dt(spec.period)));
    const Trajectory t1 = p.integrate(pair1, 0.0, horizon, samples);
    const Trajectory t2 = p.integrate(pair2, 0.0, horizon, samples);

    ComparisonReport report;
    report.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t1.samples.size(); ++k) {
        if (!t1.samples[k].nonnegative() || !t2.samples[k].nonnegative()) report.nonnegative = false;
        const OrderResult r = order_compare(t1.samples[k], t2.samples[k], Order::Order2, slack);
        report.worst_slack = std::min(report.worst_slack, r.worst_slack);
        if (!r.holds && report.preserved) {
            report.preserved = false;
            report.sample = k;
            report.node = *r.fails_at;
            report.component = r.component;
        }
    }
    return report;
}

}  // namespace lvnd
