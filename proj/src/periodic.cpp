#include "lvnd/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvnd/error.hpp"

namespace lvnd {

std::string to_string(OrbitKind kind) {
    switch (kind) {
        case OrbitKind::SemitrivialU: return "semitrivial_u";
        case OrbitKind::SemitrivialV: return "semitrivial_v";
        case OrbitKind::Coexistence: return "coexistence";
        case OrbitKind::Trivial: return "trivial";
    }
    return "unknown";
}

std::string to_string(Prediction p) {
    switch (p) {
        case Prediction::Coexistence: return "coexistence";
        case Prediction::UWins: return "u_wins";
        case Prediction::VWins: return "v_wins";
        case Prediction::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// PeriodicOrbit

void PeriodicOrbit::Knots::interpolate(double t, int component, Eigen::VectorXd& out) const {
    const auto& values = component == 0 ? u : v;
    const auto& slopes = component == 0 ? du : dv;
    const auto count = static_cast<long>(values.size());
    double phase = std::fmod(t, period);
    if (phase < 0.0) phase += period;
    const double s = phase / step;
    long k = static_cast<long>(std::floor(s));
    double theta = s - static_cast<double>(k);
    k %= count;
    if (theta <= 0.0) {
        out = values[static_cast<std::size_t>(k)];
        return;
    }
    const auto k0 = static_cast<std::size_t>(k);
    const auto k1 = static_cast<std::size_t>((k + 1) % count);
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    out = h00 * values[k0] + (h10 * step) * slopes[k0] + h01 * values[k1] + (h11 * step) * slopes[k1];
}

StateField PeriodicOrbit::at(double t) const {
    StateField s;
    s.t = t;
    knots_->interpolate(t, 0, s.u);
    knots_->interpolate(t, 1, s.v);
    return s;
}

CoefficientField PeriodicOrbit::u_field() const {
    auto knots = knots_;
    return CoefficientField(
        period_, size(), [knots](double t, Eigen::VectorXd& out) { knots->interpolate(t, 0, out); }, true, true,
        "orbit u");
}

CoefficientField PeriodicOrbit::v_field() const {
    auto knots = knots_;
    return CoefficientField(
        period_, size(), [knots](double t, Eigen::VectorXd& out) { knots->interpolate(t, 1, out); }, true, true,
        "orbit v");
}

Trajectory PeriodicOrbit::knot_trajectory() const {
    Trajectory traj;
    traj.periodic = true;
    traj.dt = knots_->step;
    const std::size_t count = knots_->u.size();
    traj.samples.reserve(count + 1);
    for (std::size_t k = 0; k <= count; ++k) {
        const std::size_t j = k % count;
        traj.samples.push_back(StateField{knots_->u[j], knots_->v[j], static_cast<double>(k) * knots_->step});
    }
    traj.samples.back().t = period_;
    return traj;
}

PeriodicOrbit build_orbit(Propagator& propagator, const StateField& state0, int slices, double positivity_floor) {
    if (slices < 1) throw ValidationError("orbit needs at least one slice");
    const SystemSpec& spec = propagator.spec();
    const double period = spec.period;
    const std::size_t n = spec.size();

    // Knots on the integrator step when the table stays small, else on the slices.
    const double ratio = period / propagator.dt();
    const long steps = std::lround(ratio);
    long count = slices;
    if (std::abs(ratio - static_cast<double>(steps)) < 1e-9 * ratio && steps % slices == 0 &&
        static_cast<std::size_t>(steps) * n <= (std::size_t{1} << 21)) {
        count = steps;
    }

    StateField start = state0;
    start.t = 0.0;
    const Trajectory traj = propagator.integrate(start, 0.0, period, static_cast<int>(count));

    auto knots = std::make_shared<PeriodicOrbit::Knots>();
    knots->period = period;
    knots->step = period / static_cast<double>(count);
    for (long k = 0; k < count; ++k) {
        const StateField& s = traj.samples[static_cast<std::size_t>(k)];
        const StateField d = rhs(spec, s.t, s);
        knots->u.push_back(s.u);
        knots->v.push_back(s.v);
        knots->du.push_back(d.u);
        knots->dv.push_back(d.v);
    }

    PeriodicOrbit orbit;
    orbit.period_ = period;
    orbit.knots_ = knots;
    orbit.residual = sup_distance(traj.samples.back(), start);
    orbit.positivity_floor = positivity_floor;

    orbit.slices_.periodic = true;
    orbit.slices_.dt = propagator.dt();
    const long stride = count / slices;
    for (int j = 0; j <= slices; ++j) {
        const long k = (static_cast<long>(j) * stride) % count;
        StateField s{knots->u[static_cast<std::size_t>(k)], knots->v[static_cast<std::size_t>(k)],
                     period * j / slices};
        orbit.slices_.samples.push_back(std::move(s));
    }

    orbit.min_u = orbit.min_v = std::numeric_limits<double>::infinity();
    orbit.max_u = orbit.max_v = 0.0;
    for (long k = 0; k < count; ++k) {
        orbit.min_u = std::min(orbit.min_u, knots->u[static_cast<std::size_t>(k)].minCoeff());
        orbit.min_v = std::min(orbit.min_v, knots->v[static_cast<std::size_t>(k)].minCoeff());
        orbit.max_u = std::max(orbit.max_u, knots->u[static_cast<std::size_t>(k)].maxCoeff());
        orbit.max_v = std::max(orbit.max_v, knots->v[static_cast<std::size_t>(k)].maxCoeff());
    }
    const bool u_pos = orbit.min_u >= positivity_floor && orbit.max_u > 0.0;
    const bool v_pos = orbit.min_v >= positivity_floor && orbit.max_v > 0.0;
    if (u_pos && v_pos) {
        orbit.kind = OrbitKind::Coexistence;
    } else if (u_pos && orbit.max_v < positivity_floor) {
        orbit.kind = OrbitKind::SemitrivialU;
    } else if (v_pos && orbit.max_u < positivity_floor) {
        orbit.kind = OrbitKind::SemitrivialV;
    } else if (orbit.max_u < positivity_floor && orbit.max_v < positivity_floor) {
        orbit.kind = OrbitKind::Trivial;
    } else {
        // One component touches the floor somewhere without vanishing: boundary collapse.
        orbit.kind = u_pos ? OrbitKind::SemitrivialU : (v_pos ? OrbitKind::SemitrivialV : OrbitKind::Trivial);
    }
    return orbit;
}

double amplitude(const CoefficientBounds& b) {
    return std::max(b.a1.upper / b.b1.lower, b.a2.upper / b.c2.lower);
}

namespace {

double resolve_floor(const OrbitOptions& options, const CoefficientBounds& bounds) {
    if (options.positivity_floor >= 0.0) return options.positivity_floor;
    return 1e-8 * std::max(amplitude(bounds), 0.0);
}

}  // namespace

PeriodicOrbit iterate_to_orbit(Propagator& propagator, const StateField& start, const OrbitOptions& options,
                               double positivity_floor, int monotone) {
    StateField x = start;
    x.t = 0.0;
    bool converged = false;
    long n = 0;
    while (n < options.max_periods) {
        StateField y = propagator.period_map(x);
        y.t = 0.0;
        ++n;
        if (monotone != 0) {
            const OrderResult r = monotone > 0 ? order_compare(y, x, Order::Order2, options.monotone_slack)
                                               : order_compare(x, y, Order::Order2, options.monotone_slack);
            if (!r.holds) {
                std::ostringstream msg;
                msg << "monotone iteration violated at period " << n << ", node " << *r.fails_at << " ("
                    << (r.component == 0 ? "u" : "v") << "), slack " << r.worst_slack;
                throw NumericalError(msg.str());
            }
        }
        const double diff = sup_distance(y, x);
        x = std::move(y);
        if (diff < options.tolerance) {
            converged = true;
            break;
        }
    }
    PeriodicOrbit orbit = build_orbit(propagator, x, options.slices, positivity_floor);
    orbit.periods = n;
    orbit.converged = converged;
    return orbit;
}

namespace {

PeriodicOrbit semitrivial(const SystemSpec& spec, int which, const OrbitOptions& options) {
    const CoefficientBounds bounds = compute_bounds(spec.coefficients, 256);
    const CoefficientField& a = which == 0 ? spec.coefficients.a1 : spec.coefficients.a2;
    const double nu = which == 0 ? spec.nu1 : spec.nu2;
    const SpectralResult s = principal_spectrum_point(spec.dispersal, nu, a, SpectralOptions{options.dt});
    if (!(s.lambda > 0.0)) {
        std::ostringstream msg;
        msg << "lambda(nu, a" << (which + 1) << ") = " << s.lambda
            << " <= 0: no positive semitrivial orbit is guaranteed";
        throw HypothesisError(msg.str());
    }
    const auto n = static_cast<Eigen::Index>(spec.size());
    StateField start;
    if (which == 0) {
        start.u = Eigen::VectorXd::Constant(n, bounds.a1.upper / bounds.b1.lower + 1.0);
        start.v = Eigen::VectorXd::Zero(n);
    } else {
        start.u = Eigen::VectorXd::Zero(n);
        start.v = Eigen::VectorXd::Constant(n, bounds.a2.upper / bounds.c2.lower + 1.0);
    }
    Propagator prop(spec, options.dt.value_or(default_dt(spec.period)));
    return iterate_to_orbit(prop, start, options, resolve_floor(options, bounds), which == 0 ? 1 : -1);
}

}  // namespace

PeriodicOrbit semitrivial_u(const SystemSpec& spec, const OrbitOptions& options) {
    return semitrivial(spec, 0, options);
}

PeriodicOrbit semitrivial_v(const SystemSpec& spec, const OrbitOptions& options) {
    return semitrivial(spec, 1, options);
}

PeriodicOrbit solve_scalar_periodic(const Grid& grid, std::shared_ptr<const DispersalOperator> op, double nu,
                                    const CoefficientField& a, const CoefficientField& b,
                                    const OrbitOptions& options) {
    const auto one = CoefficientField::constant(a.size(), a.period(), 1.0);
    CoefficientSet set{a, a, b, one, one, one};
    const SystemSpec spec = make_system(grid, std::move(op), nu, nu, std::move(set));
    return semitrivial(spec, 0, options);
}

// ---------------------------------------------------------------------------
// Criteria

namespace {

double max_abs_difference(const CoefficientField& f, const CoefficientField& g, int samples) {
    Eigen::VectorXd fv(static_cast<Eigen::Index>(f.size()));
    Eigen::VectorXd gv(fv.size());
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = f.period() * k / samples;
        f.evaluate(t, fv);
        g.evaluate(t, gv);
        worst = std::max(worst, sup_norm(fv - gv));
    }
    return worst;
}

double spread(const CoefficientField& f, int samples) {
    const Range r = field_range(f, samples);
    return r.upper - r.lower;
}

bool all_positive(const std::vector<double>& margins) {
    return std::all_of(margins.begin(), margins.end(), [](double m) { return m > 0.0; });
}

}  // namespace

CriteriaReport evaluate_criteria(const SystemSpec& spec, const CoefficientBounds& b, double lambda0,
                                 int time_samples) {
    CriteriaReport r;
    r.bounds = b;
    r.lambda0 = lambda0;
    r.nu1 = spec.nu1;
    r.nu2 = spec.nu2;
    r.regime = spec.dispersal->regime();
    const double nu1 = spec.nu1;
    const double nu2 = spec.nu2;
    const auto& c = spec.coefficients;

    r.standing.margins = {b.a1.lower + nu1 * lambda0, b.a2.lower + nu2 * lambda0};
    r.standing.holds = all_positive(r.standing.margins);

    r.a1.margins = {b.a1.lower - (-nu1 * lambda0 + b.c1.upper * b.a2.upper / b.c2.lower),
                    b.a2.lower - (-nu2 * lambda0 + b.b2.upper * b.a1.upper / b.b1.lower)};
    r.a1.holds = all_positive(r.a1.margins);

    // A(2): equalities enter as -|difference| and must be exactly zero.
    const double nu_diff = std::abs(nu1 - nu2);
    const double a_diff = max_abs_difference(c.a1, c.a2, time_samples);
    double b_margin = std::numeric_limits<double>::infinity();
    double c_margin = std::numeric_limits<double>::infinity();
    Eigen::VectorXd b1(static_cast<Eigen::Index>(spec.size())), b2(b1.size()), c1(b1.size()), c2(b1.size());
    for (int k = 0; k < time_samples; ++k) {
        const double t = spec.period * k / time_samples;
        c.b1.evaluate(t, b1);
        c.b2.evaluate(t, b2);
        c.c1.evaluate(t, c1);
        c.c2.evaluate(t, c2);
        b_margin = std::min(b_margin, b1.minCoeff() - b2.maxCoeff());
        c_margin = std::min(c_margin, c2.minCoeff() - c1.maxCoeff());
    }
    r.a2.margins = {0.0 - nu_diff, 0.0 - a_diff, b_margin, c_margin};
    r.a2.holds = nu_diff == 0.0 && a_diff == 0.0 && b_margin > 0.0 && c_margin > 0.0;

    const double constancy = std::max({spread(c.b1, time_samples), spread(c.b2, time_samples),
                                       spread(c.c1, time_samples), spread(c.c2, time_samples)});
    r.a3.margins = {0.0 - nu_diff, 0.0 - a_diff, b.b1.lower - b.b2.upper, b.c2.lower - b.c1.upper, 0.0 - constancy};
    r.a3.holds = r.a2.holds && constancy == 0.0;

    r.b1.margins = {b.a1.lower - b.c1.upper * b.a2.upper / b.c2.lower,
                    b.a1.lower * b.b2.lower / b.b1.upper - b.a2.upper, 0.0 - nu_diff, b.a1.lower - b.a2.upper};
    r.b1.holds = r.b1.margins[0] > 0.0 && r.b1.margins[1] >= 0.0 && nu_diff == 0.0 && r.b1.margins[3] >= 0.0;

    r.b2.margins = {b.c1.lower * b.a2.lower / b.c2.upper - b.a1.upper,
                    b.a2.lower - b.a1.upper * b.b2.upper / b.b1.lower, 0.0 - nu_diff, b.a2.lower - b.a1.upper};
    r.b2.holds = r.b2.margins[0] >= 0.0 && r.b2.margins[1] > 0.0 && nu_diff == 0.0 && r.b2.margins[3] >= 0.0;

    if (!r.standing.holds) {
        r.prediction = Prediction::Inconclusive;
    } else if (r.a1.holds || r.a2.holds || r.a3.holds) {
        r.prediction = Prediction::Coexistence;
    } else if (r.b1.holds) {
        r.prediction = Prediction::UWins;
    } else if (r.b2.holds) {
        r.prediction = Prediction::VWins;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Coexistence

namespace {

// Candidate (first(t), second(t)) sampled on the knots of `base`, with one
// component replaced by a constant profile or a scaled copy of the base.
Trajectory corner_candidate(const PeriodicOrbit& base, int base_component, const Eigen::VectorXd* profile,
                            double epsilon) {
    Trajectory traj = base.knot_trajectory();
    for (auto& s : traj.samples) {
        const Eigen::VectorXd& own = base_component == 0 ? s.u : s.v;
        const Eigen::VectorXd other = profile != nullptr ? Eigen::VectorXd(epsilon * *profile) : Eigen::VectorXd(epsilon * own);
        if (base_component == 0) {
            s.v = other;
        } else {
            s.u = other;
        }
    }
    return traj;
}

}  // namespace

CoexistenceResult coexistence_iterate(const SystemSpec& spec, const PeriodicOrbit& u_star,
                                      const PeriodicOrbit& v_star, const CoexistenceOptions& options) {
    if (u_star.size() != spec.size() || v_star.size() != spec.size()) {
        throw ValidationError("semitrivial orbits do not match the system grid");
    }
    const CoefficientBounds b = compute_bounds(spec.coefficients, 256);
    const double floor = resolve_floor(options.orbit, b);
    const double period = spec.period;
    const std::size_t n = spec.size();
    const SpectralOptions sopt{options.orbit.dt};

    const auto shift_plus = CoefficientField::constant(n, period, b.a2.lower - b.b2.upper * b.a1.upper / b.b1.lower);
    const auto shift_minus = CoefficientField::constant(n, period, b.a1.lower - b.c1.upper * b.a2.upper / b.c2.lower);
    const Eigen::VectorXd phi = principal_spectrum_point(spec.dispersal, spec.nu2, shift_plus, sopt).perron_function;
    const Eigen::VectorXd psi = principal_spectrum_point(spec.dispersal, spec.nu1, shift_minus, sopt).perron_function;

    CoexistenceResult result;
    result.plus_corner.epsilon = options.epsilon.value_or(1e-3 * u_star.min_u / phi.maxCoeff());
    result.minus_corner.epsilon = options.epsilon.value_or(1e-3 * v_star.min_v / psi.maxCoeff());
    result.plus_corner.construction = "perron";
    result.minus_corner.construction = "perron";
    bool plus_scaled = false;
    bool minus_scaled = false;

    if (options.verify_corners && result.plus_corner.epsilon > 0.0) {
        result.plus_corner.checked = true;
        result.plus_corner.check =
            check_subsuper(spec, corner_candidate(u_star, 0, &phi, result.plus_corner.epsilon), SolutionKind::Super);
        if (!result.plus_corner.check.satisfied) {
            const SubSuperReport alt = check_subsuper(
                spec, corner_candidate(u_star, 0, nullptr, result.plus_corner.epsilon), SolutionKind::Super);
            if (alt.satisfied) {
                result.plus_corner.check = alt;
                result.plus_corner.construction = "semitrivial";
                plus_scaled = true;
            }
        }
    }
    if (options.verify_corners && result.minus_corner.epsilon > 0.0) {
        result.minus_corner.checked = true;
        result.minus_corner.check =
            check_subsuper(spec, corner_candidate(v_star, 1, &psi, result.minus_corner.epsilon), SolutionKind::Sub);
        if (!result.minus_corner.check.satisfied) {
            const SubSuperReport alt = check_subsuper(
                spec, corner_candidate(v_star, 1, nullptr, result.minus_corner.epsilon), SolutionKind::Sub);
            if (alt.satisfied) {
                result.minus_corner.check = alt;
                result.minus_corner.construction = "semitrivial";
                minus_scaled = true;
            }
        }
    }

    StateField plus_start{u_star.initial().u,
                          result.plus_corner.epsilon * (plus_scaled ? u_star.initial().u : phi), 0.0};
    StateField minus_start{result.minus_corner.epsilon * (minus_scaled ? v_star.initial().v : psi),
                           v_star.initial().v, 0.0};

    Propagator prop(spec, options.orbit.dt.value_or(default_dt(period)));
    result.plus = iterate_to_orbit(prop, plus_start, options.orbit, floor, 1);
    result.minus = iterate_to_orbit(prop, minus_start, options.orbit, floor, -1);
    result.gap = sup_distance(result.plus.initial(), result.minus.initial());

    result.sandwich = true;
    const auto& ps = result.plus.slices().samples;
    const auto& ms = result.minus.slices().samples;
    if (ps.size() != ms.size()) {
        result.sandwich = false;
    } else {
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (!order_compare(ms[k], ps[k], Order::Order2, 1e-8).holds) {
                result.sandwich = false;
                break;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Uniqueness under A(3)

UniquenessReport uniqueness_check_A3(const SystemSpec& spec, const PeriodicOrbit& orbit, const PeriodicOrbit* u_star,
                                     const PeriodicOrbit* v_star, const PeriodicOrbit* theta,
                                     std::optional<double> dt) {
    const auto& c = spec.coefficients;
    const CoefficientField* fields[] = {&c.b1, &c.b2, &c.c1, &c.c2};
    for (const CoefficientField* f : fields) {
        const Range r = field_range(*f, 64);
        if (r.upper != r.lower) throw HypothesisError("A(3) requires constant b and c coefficients");
    }
    if (spec.nu1 != spec.nu2) throw HypothesisError("A(3) requires nu1 = nu2");
    if (max_abs_difference(c.a1, c.a2, 256) != 0.0) throw HypothesisError("A(3) requires a1 = a2");
    const double b1 = c.b1.at(0.0)[0];
    const double b2 = c.b2.at(0.0)[0];
    const double c1 = c.c1.at(0.0)[0];
    const double c2 = c.c2.at(0.0)[0];
    if (!(b1 > b2) || !(c1 < c2)) throw HypothesisError("A(3) requires b1 > b2 and c1 < c2");

    UniquenessReport rep;
    rep.ratio = (b1 - b2) / (c2 - c1);
    double u_sup = 0.0;
    for (const auto& s : orbit.slices().samples) {
        u_sup = std::max(u_sup, sup_norm(s.u));
        rep.relation_error = std::max(rep.relation_error, sup_norm(s.v - rep.ratio * s.u));
    }
    if (u_sup > 0.0) rep.relation_error /= u_sup;
    rep.relation_ok = rep.relation_error <= 1e-6;

    const auto one = CoefficientField::constant(spec.size(), spec.period, 1.0);
    const auto reduced_b = CoefficientField::constant(spec.size(), spec.period, b1 + c1 * rep.ratio);
    CoefficientSet reduced{c.a1, c.a1, reduced_b, one, one, one};
    const SystemSpec reduced_spec = make_system(spec.grid, spec.dispersal, spec.nu1, spec.nu1, std::move(reduced));
    StateField start{orbit.initial().u, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.size())), 0.0};
    const StateField mapped = poincare_map(reduced_spec, start, dt);
    rep.reduced_residual = sup_norm(mapped.u - start.u);
    rep.reduced_ok = rep.reduced_residual <= 1e-6 * std::max(1.0, u_sup);

    if (theta != nullptr) {
        const double scale = std::max(1.0, theta->max_u);
        if (u_star != nullptr) {
            for (std::size_t k = 0; k < theta->slices().samples.size(); ++k) {
                const auto& th = theta->slices().samples[k].u;
                rep.theta_u_error = std::max(rep.theta_u_error, sup_norm(u_star->at(theta->slices().samples[k].t).u - th / b1));
            }
        }
        if (v_star != nullptr) {
            for (std::size_t k = 0; k < theta->slices().samples.size(); ++k) {
                const auto& th = theta->slices().samples[k].u;
                rep.theta_v_error = std::max(rep.theta_v_error, sup_norm(v_star->at(theta->slices().samples[k].t).v - th / c2));
            }
        }
        rep.theta_ok = rep.theta_u_error <= 1e-7 * scale && rep.theta_v_error <= 1e-7 * scale;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Extinction

ExtinctionReport extinction_run(const SystemSpec& spec, const StateField& initial, const PeriodicOrbit& survivor,
                                const ExtinctionOptions& options) {
    if (!initial.nonnegative()) throw ValidationError("extinction_run: initial state must be nonnegative");
    if (options.samples_per_period < 1) throw ValidationError("extinction_run: samples_per_period must be positive");
    const CoefficientBounds b = compute_bounds(spec.coefficients, 256);
    const std::size_t n = spec.size();
    const double period = spec.period;
    const bool v_dies = options.species == ExtinctSpecies::V;

    auto constant = [&](double value) { return CoefficientField::constant(n, period, value); };
    // Constant-coefficient comparison system: below the true solution in the
    // competitive order when v dies, above it when u dies.
    CoefficientSet bounding =
        v_dies ? CoefficientSet{constant(b.a1.lower), constant(b.a2.upper), constant(b.b1.upper),
                                constant(b.b2.lower), constant(b.c1.upper), constant(b.c2.lower)}
               : CoefficientSet{constant(b.a1.upper), constant(b.a2.lower), constant(b.b1.lower),
                                constant(b.b2.upper), constant(b.c1.lower), constant(b.c2.upper)};
    const SystemSpec sandwich = make_system(spec.grid, spec.dispersal, spec.nu1, spec.nu2, std::move(bounding));

    const double dt = options.dt.value_or(default_dt(period));
    Propagator truth(spec, dt);
    Propagator bound(sandwich, dt);

    ExtinctionReport rep;
    rep.sandwich_worst_slack = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd& target = v_dies ? survivor.initial().u : survivor.initial().v;
    auto losing = [&](const StateField& s) { return sup_norm(v_dies ? s.v : s.u); };
    auto distance = [&](const StateField& s) { return sup_norm((v_dies ? s.u : s.v) - target); };

    StateField x = initial;
    x.t = 0.0;
    StateField y = initial;
    y.t = 0.0;
    rep.survivor_distance.push_back(distance(x));
    rep.final_sup_extinct = losing(x);
    if (rep.final_sup_extinct < options.extinction_tol) rep.extinct = true;

    while (!rep.extinct && rep.periods < options.max_periods) {
        const double t0 = static_cast<double>(rep.periods) * period;
        const Trajectory tx = truth.integrate(x, t0, t0 + period, options.samples_per_period);
        const Trajectory ty = bound.integrate(y, t0, t0 + period, options.samples_per_period);
        for (std::size_t k = 1; k < tx.samples.size(); ++k) {
            const OrderResult r = v_dies ? order_compare(ty.samples[k], tx.samples[k], Order::Order2, options.sandwich_slack)
                                         : order_compare(tx.samples[k], ty.samples[k], Order::Order2, options.sandwich_slack);
            rep.sandwich_worst_slack = std::min(rep.sandwich_worst_slack, r.worst_slack);
            if (!r.holds) rep.sandwich_preserved = false;
            ++rep.sandwich_samples;
        }
        x = tx.samples.back();
        y = ty.samples.back();
        ++rep.periods;
        rep.survivor_distance.push_back(distance(x));
        rep.final_sup_extinct = losing(x);
        if (rep.final_sup_extinct < options.extinction_tol) rep.extinct = true;
    }
    rep.final_distance = rep.survivor_distance.back();
    if (rep.sandwich_samples == 0) rep.sandwich_worst_slack = 0.0;
    return rep;
}

}  // namespace lvnd
