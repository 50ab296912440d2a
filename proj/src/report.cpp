#include "lvnd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lvnd/error.hpp"
#include "lvnd/ode.hpp"
#include "lvnd/spectral.hpp"

namespace lvnd {

namespace fs = std::filesystem;

Scenario apply_overrides(Scenario scenario, const RunOverrides& o) {
    if (o.dt) {
        if (!(*o.dt > 0.0)) throw ValidationError("--dt must be positive");
        scenario.run.dt = *o.dt;
    }
    if (o.max_periods) {
        if (*o.max_periods < 1) throw ValidationError("--max-periods must be positive");
        scenario.run.max_periods = *o.max_periods;
    }
    if (o.seed) scenario.run.seed = *o.seed;
    return scenario;
}

int exit_code_for(const Error& error) {
    return error.kind() == ErrorKind::Validation ? kExitValidation : kExitNumerical;
}

Json scenario_header(const Scenario& sc) {
    Json j;
    j["scenario"] = sc.name;
    j["scenario_hash"] = sc.hash_hex();
    j["seed"] = sc.run.seed;
    return j;
}

std::string dump_json(const Json& j) {
    return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string coords(const Grid& grid, std::size_t i) {
    const Point& p = grid.node(i);
    return grid.dimension() == 2 ? num(p.x) + "," + num(p.y) : num(p.x);
}

std::string out_path(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

Json vec(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Json range(const Range& r) {
    return Json{{"lower", r.lower}, {"upper", r.upper}};
}

Json tolerances(const Scenario& sc, double dt) {
    Json t;
    t["dt"] = dt;
    t["max_periods"] = sc.run.max_periods;
    t["orbit_tolerance"] = sc.run.tolerance;
    t["monotone_slack"] = 1e-9;
    t["clamp_threshold"] = kClampThreshold;
    t["slices"] = sc.run.slices;
    t["extinction_tol"] = sc.run.extinction_tol;
    return t;
}

OrbitOptions orbit_options(const Scenario& sc) {
    OrbitOptions o;
    o.dt = sc.run.dt;
    o.tolerance = sc.run.tolerance;
    o.max_periods = sc.run.max_periods;
    o.slices = sc.run.slices;
    return o;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Grid& grid, const Trajectory& traj) {
    std::ostringstream out;
    out << (grid.dimension() == 2 ? "t,node_index,x,y,u,v\n" : "t,node_index,x,u,v\n");
    for (const auto& s : traj.samples) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            out << num(s.t) << ',' << i << ',' << coords(grid, i) << ',' << num(s.u[k]) << ',' << num(s.v[k]) << '\n';
        }
    }
    write_text(path, out.str());
}

void write_orbit_csv(const std::string& path, const Grid& grid, const PeriodicOrbit& orbit) {
    std::ostringstream out;
    out << (grid.dimension() == 2 ? "slice,t,node_index,x,y,u,v\n" : "slice,t,node_index,x,u,v\n");
    const auto& samples = orbit.slices().samples;
    for (std::size_t k = 0; k < orbit.slice_count(); ++k) {
        const auto& s = samples[k];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto n = static_cast<Eigen::Index>(i);
            out << k << ',' << num(s.t) << ',' << i << ',' << coords(grid, i) << ',' << num(s.u[n]) << ','
                << num(s.v[n]) << '\n';
        }
    }
    write_text(path, out.str());
}

Json to_json(const SpectralResult& r, bool with_profile) {
    Json j;
    j["lambda"] = r.lambda;
    j["gap"] = r.gap;
    j["gap_tol"] = r.gap_tol;
    j["max_diagonal"] = r.max_diagonal;
    j["existence"] = to_string(r.existence);
    j["is_principal_eigenvalue"] = r.is_principal_eigenvalue;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    if (with_profile) j["perron_function"] = vec(r.perron_function);
    return j;
}

Json to_json(const CoefficientBounds& b) {
    return Json{{"a1", range(b.a1)}, {"a2", range(b.a2)}, {"b1", range(b.b1)},
                {"b2", range(b.b2)}, {"c1", range(b.c1)}, {"c2", range(b.c2)}};
}

namespace {

Json hypothesis(const Hypothesis& h) {
    Json m = Json::array();
    for (double v : h.margins) m.push_back(v);
    return Json{{"holds", h.holds}, {"margins", m}};
}

}  // namespace

Json to_json(const CriteriaReport& r) {
    Json j;
    j["regime"] = to_string(r.regime);
    j["lambda0"] = r.lambda0;
    j["nu1"] = r.nu1;
    j["nu2"] = r.nu2;
    j["bounds"] = to_json(r.bounds);
    j["standing"] = hypothesis(r.standing);
    j["A1"] = hypothesis(r.a1);
    j["A2"] = hypothesis(r.a2);
    j["A3"] = hypothesis(r.a3);
    j["B1"] = hypothesis(r.b1);
    j["B2"] = hypothesis(r.b2);
    j["prediction"] = to_string(r.prediction);
    return j;
}

Json to_json(const PeriodicOrbit& o) {
    Json j;
    j["kind"] = to_string(o.kind);
    j["converged"] = o.converged;
    j["status"] = o.converged ? "converged" : "unresolved";
    j["periods"] = o.periods;
    j["residual"] = o.residual;
    j["positivity_floor"] = o.positivity_floor;
    j["min_u"] = o.min_u;
    j["max_u"] = o.max_u;
    j["min_v"] = o.min_v;
    j["max_v"] = o.max_v;
    j["slices"] = o.slice_count();
    return j;
}

Json to_json(const ExtinctionReport& r) {
    Json j;
    j["extinct"] = r.extinct;
    j["periods"] = r.periods;
    j["final_sup_extinct"] = r.final_sup_extinct;
    j["final_distance"] = r.final_distance;
    Json d = Json::array();
    for (double v : r.survivor_distance) d.push_back(v);
    j["survivor_distance"] = d;
    j["sandwich_preserved"] = r.sandwich_preserved;
    j["sandwich_worst_slack"] = r.sandwich_worst_slack;
    j["sandwich_samples"] = r.sandwich_samples;
    return j;
}

Json to_json(const Lemma31Result& r) {
    Json j;
    j["u0"] = r.orbit.u.empty() ? 0.0 : r.orbit.u.front();
    j["v0"] = r.orbit.v.empty() ? 0.0 : r.orbit.v.front();
    j["gap"] = r.gap;
    j["residual"] = r.residual;
    j["u_star0"] = r.u_star0;
    j["v_star0"] = r.v_star0;
    j["aux_residual"] = r.aux_residual;
    j["periods_upper"] = r.periods_upper;
    j["periods_lower"] = r.periods_lower;
    j["converged"] = r.converged;
    j["ratio_margin"] = r.ratio_margin;
    return j;
}

// ---------------------------------------------------------------------------

Json run_simulate(const Scenario& sc, const std::string& out_dir) {
    const SystemSpec spec = sc.build_system();
    const double dt = sc.run.dt.value_or(default_dt(spec.period));
    const double horizon = sc.run.horizon.value_or(5.0 * spec.period);
    const StateField init = sc.initial_state(spec.grid);
    const Trajectory traj = integrate(spec, init, 0.0, horizon, dt, sc.run.samples);
    write_trajectory_csv(out_path(out_dir, "trajectory.csv"), spec.grid, traj);

    Json j = scenario_header(sc);
    j["command"] = "simulate";
    j["tolerances"] = tolerances(sc, dt);
    j["horizon"] = horizon;
    j["samples"] = sc.run.samples;
    const StateField& last = traj.samples.back();
    j["final"] = Json{{"t", last.t}, {"sup_u", sup_norm(last.u)}, {"sup_v", sup_norm(last.v)},
                      {"min_u", last.u.minCoeff()}, {"min_v", last.v.minCoeff()}};
    write_text(out_path(out_dir, "simulate.json"), dump_json(j));
    return j;
}

Json run_spectrum(const Scenario& sc, const std::string& out_dir) {
    const Grid grid = sc.build_grid();
    const auto op = sc.build_dispersal(grid);
    const double nu = sc.spectrum.nu.value_or(sc.nu1);
    const CoefficientField l = sc.field(grid, sc.spectrum.l);
    const SpectralOptions opt{sc.run.dt};
    const SpectralResult r = principal_spectrum_point(op, nu, l, opt);

    Json j = scenario_header(sc);
    j["command"] = "spectrum";
    j["regime"] = to_string(sc.regime);
    j["nu"] = nu;
    j["l"] = sc.spectrum.l;
    j["period"] = sc.period;
    j["dt"] = sc.run.dt.value_or(default_dt(sc.period));
    j["power_tolerance"] = opt.tolerance;
    j["lambda0"] = lambda0(op, sc.period, opt);
    j.update(to_json(r));
    write_text(out_path(out_dir, "spectrum.json"), dump_json(j));
    return j;
}

Json run_criteria(const Scenario& sc, const std::string& out_dir) {
    const SystemSpec spec = sc.build_system();
    const double l0 = lambda0(spec.dispersal, spec.period, SpectralOptions{sc.run.dt});
    const CriteriaReport r = evaluate_criteria(spec, sc.bounds(spec), l0);
    Json j = scenario_header(sc);
    j["command"] = "criteria";
    j["time_samples"] = 256;
    j["declared_bounds"] = Json::array();
    for (const auto& [k, v] : sc.declared_bounds) j["declared_bounds"].push_back(k);
    j.update(to_json(r));
    write_text(out_path(out_dir, "criteria.json"), dump_json(j));
    return j;
}

Json run_periodic(const Scenario& sc, const std::string& out_dir) {
    const SystemSpec spec = sc.build_system();
    const OrbitOptions oo = orbit_options(sc);
    const PeriodicOrbit us = semitrivial_u(spec, oo);
    const PeriodicOrbit vs = semitrivial_v(spec, oo);
    write_orbit_csv(out_path(out_dir, "orbit_u_star.csv"), spec.grid, us);
    write_orbit_csv(out_path(out_dir, "orbit_v_star.csv"), spec.grid, vs);

    CoexistenceOptions co;
    co.orbit = oo;
    co.epsilon = sc.run.epsilon;
    const CoexistenceResult cr = coexistence_iterate(spec, us, vs, co);
    write_orbit_csv(out_path(out_dir, "orbit_plus.csv"), spec.grid, cr.plus);
    write_orbit_csv(out_path(out_dir, "orbit_minus.csv"), spec.grid, cr.minus);

    Json j = scenario_header(sc);
    j["command"] = "periodic";
    j["tolerances"] = tolerances(sc, sc.run.dt.value_or(default_dt(spec.period)));
    j["u_star"] = to_json(us);
    j["v_star"] = to_json(vs);
    auto corner = [](const CornerReport& c) {
        Json k{{"epsilon", c.epsilon}, {"construction", c.construction}, {"checked", c.checked}};
        if (c.checked) {
            k["worst_violation"] = c.check.worst_violation;
            k["tolerance"] = c.check.tolerance;
            k["satisfied"] = c.check.satisfied;
        }
        return k;
    };
    j["plus_corner"] = corner(cr.plus_corner);
    j["minus_corner"] = corner(cr.minus_corner);
    j["plus"] = to_json(cr.plus);
    j["minus"] = to_json(cr.minus);
    j["gap"] = cr.gap;
    j["sandwich"] = cr.sandwich;
    write_text(out_path(out_dir, "periodic.json"), dump_json(j));
    return j;
}

Json run_extinct(const Scenario& sc, const std::string& out_dir) {
    const SystemSpec spec = sc.build_system();
    std::string species = sc.run.extinct;
    if (species.empty()) {
        const double l0 = lambda0(spec.dispersal, spec.period, SpectralOptions{sc.run.dt});
        const CriteriaReport cr = evaluate_criteria(spec, sc.bounds(spec), l0);
        species = cr.prediction == Prediction::VWins ? "u" : "v";
    }
    const OrbitOptions oo = orbit_options(sc);
    const bool v_dies = species == "v";
    const PeriodicOrbit survivor = v_dies ? semitrivial_u(spec, oo) : semitrivial_v(spec, oo);
    ExtinctionOptions eo;
    eo.dt = sc.run.dt;
    eo.max_periods = std::min(sc.run.max_periods, eo.max_periods);
    eo.extinction_tol = sc.run.extinction_tol;
    eo.species = v_dies ? ExtinctSpecies::V : ExtinctSpecies::U;
    const ExtinctionReport r = extinction_run(spec, sc.initial_state(spec.grid), survivor, eo);

    Json j = scenario_header(sc);
    j["command"] = "extinct";
    j["tolerances"] = tolerances(sc, sc.run.dt.value_or(default_dt(spec.period)));
    j["species"] = species;
    j["survivor"] = to_json(survivor);
    j.update(to_json(r));
    write_text(out_path(out_dir, "extinction.json"), dump_json(j));
    return j;
}

Json run_lemma31(const Scenario& sc, const std::string& out_dir) {
    const ForcedPlanarSystem sys = sc.build_planar();
    Lemma31Options lo;
    lo.max_periods = sc.run.max_periods;
    lo.slices = sc.run.slices;
    const Lemma31Result r = lemma31_periodic(sys, lo);

    std::ostringstream csv;
    csv << "slice,t,u,v\n";
    for (std::size_t k = 0; k < r.orbit.t.size(); ++k) {
        csv << k << ',' << num(r.orbit.t[k]) << ',' << num(r.orbit.u[k]) << ',' << num(r.orbit.v[k]) << '\n';
    }
    write_text(out_path(out_dir, "planar_orbit.csv"), csv.str());

    Json j = scenario_header(sc);
    j["command"] = "lemma31";
    j["steps"] = sys.steps;
    j["tolerance"] = lo.tolerance;
    j.update(to_json(r));
    write_text(out_path(out_dir, "lemma31.json"), dump_json(j));
    return j;
}

// ---------------------------------------------------------------------------
// Property suite

namespace {

class Suite {
public:
    void check(const std::string& name, bool passed, double value, double threshold) {
        checks_.push_back(Json{{"name", name}, {"passed", passed}, {"value", value}, {"threshold", threshold}});
        if (!passed) ok_ = false;
    }

    // Runs a group of checks; a library error fails the group instead of aborting the suite.
    template <class F>
    void guarded(const std::string& name, F&& f) {
        try {
            f();
        } catch (const Error& e) {
            checks_.push_back(Json{{"name", name}, {"passed", false}, {"error", to_string(e.kind())}, {"message", e.what()}});
            ok_ = false;
        }
    }

    bool ok() const { return ok_; }
    const Json& checks() const { return checks_; }

private:
    Json checks_ = Json::array();
    bool ok_ = true;
};

}  // namespace

Json run_verify(const Scenario& sc) {
    Suite suite;
    std::mt19937_64 rng(sc.run.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const SystemSpec spec = sc.build_system();
    const Grid& grid = spec.grid;
    const DispersalOperator& op = *spec.dispersal;
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double period = spec.period;
    const double dt = sc.run.dt.value_or(default_dt(period));
    const SpectralOptions sopt{sc.run.dt};

    suite.guarded("kernel", [&] {
        const Kernel kernel = build_kernel(grid, sc.radius, sc.profile);
        suite.check("kernel_mass", std::abs(kernel.discrete_mass() - 1.0) <= 1e-13, std::abs(kernel.discrete_mass() - 1.0), 1e-13);
        bool symmetric = true;
        for (int k1 = -kernel.reach(1); k1 <= kernel.reach(1); ++k1) {
            for (int k0 = -kernel.reach(0); k0 <= kernel.reach(0); ++k0) {
                if (kernel.at(k0, k1) != kernel.at(-k0, -k1) || kernel.at(k0, k1) < 0.0) symmetric = false;
            }
        }
        suite.check("kernel_symmetry", symmetric, symmetric ? 0.0 : 1.0, 0.0);
    });

    suite.guarded("operator", [&] {
        const Eigen::VectorXd rows = op.apply(Eigen::VectorXd::Ones(n));
        if (op.regime() == Regime::DirichletType) {
            suite.check("row_sums_nonpositive", rows.maxCoeff() <= 1e-15, rows.maxCoeff(), 1e-15);
        } else {
            suite.check("row_sums_zero", sup_norm(rows) == 0.0, sup_norm(rows), 0.0);
        }
        const Eigen::MatrixXd& k = op.convolution();
        suite.check("offdiagonal_nonnegative", k.minCoeff() >= 0.0, k.minCoeff(), 0.0);
    });

    double l0 = 0.0;
    suite.guarded("lambda0", [&] {
        l0 = lambda0(spec.dispersal, period, sopt);
        if (op.regime() == Regime::DirichletType) {
            suite.check("lambda0_negative", l0 < -1e-4, l0, -1e-4);
        } else {
            suite.check("lambda0_zero", std::abs(l0) <= 1e-12, std::abs(l0), 1e-12);
        }
    });

    suite.guarded("shift_monotonicity", [&] {
        double worst_slack = std::numeric_limits<double>::infinity();
        double worst_shift = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            const double c0 = 2.0 * unit(rng) - 1.0;
            const double c1 = unit(rng);
            const double c2 = unit(rng);
            const double bump = 0.5 * unit(rng);
            const double shift = 2.0 * unit(rng) - 1.0;
            auto l = CoefficientField::pointwise(grid, period, [=](double t, Point p) {
                return c0 + c1 * std::sin(2.0 * M_PI * t / period) + c2 * std::cos(p.x);
            });
            auto lt = CoefficientField::pointwise(grid, period, [=](double t, Point p) {
                return c0 + c1 * std::sin(2.0 * M_PI * t / period) + c2 * std::cos(p.x) + bump * (1.0 + std::cos(2.0 * M_PI * t / period));
            });
            const auto r = verify_shift_and_monotonicity(spec.dispersal, spec.nu1, l, lt, shift, sopt);
            worst_slack = std::min(worst_slack, r.monotone_slack);
            worst_shift = std::max(worst_shift, r.shift_error);
        }
        suite.check("spectral_monotonicity", worst_slack >= -1e-8, worst_slack, -1e-8);
        suite.check("spectral_shift_identity", worst_shift <= 1e-8, worst_shift, 1e-8);
    });

    const CoefficientBounds bounds = sc.bounds(spec);
    const double u_cap = bounds.a1.upper / bounds.b1.lower + 1.0;
    const double v_cap = bounds.a2.upper / bounds.c2.lower + 1.0;

    suite.guarded("comparison", [&] {
        bool preserved = true;
        bool nonnegative = true;
        for (int trial = 0; trial < 5; ++trial) {
            StateField p2{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0};
            StateField p1{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0};
            for (Eigen::Index i = 0; i < n; ++i) {
                p2.u[i] = u_cap * unit(rng);
                p1.u[i] = p2.u[i] * unit(rng);
                p1.v[i] = v_cap * unit(rng);
                p2.v[i] = p1.v[i] * unit(rng);
            }
            const ComparisonReport r = comparison_test(spec, p1, p2, 2.0 * period, 20, dt);
            preserved = preserved && r.preserved;
            nonnegative = nonnegative && r.nonnegative;
        }
        suite.check("comparison_order_preserved", preserved, preserved ? 0.0 : 1.0, 0.0);
        suite.check("nonnegativity", nonnegative, nonnegative ? 0.0 : 1.0, 0.0);
    });

    suite.guarded("boundedness", [&] {
        StateField s{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0};
        for (Eigen::Index i = 0; i < n; ++i) {
            s.u[i] = u_cap * unit(rng);
            s.v[i] = v_cap * unit(rng);
        }
        const Trajectory traj = integrate(spec, s, 0.0, 5.0 * period, dt, 50);
        double excess = -std::numeric_limits<double>::infinity();
        for (const auto& x : traj.samples) {
            excess = std::max({excess, x.u.maxCoeff() - u_cap, x.v.maxCoeff() - v_cap});
        }
        suite.check("bounded_by_logistic_caps", excess <= 1e-6, excess, 1e-6);
    });

    Json criteria;
    suite.guarded("criteria", [&] {
        const CriteriaReport cr = evaluate_criteria(spec, bounds, l0);
        criteria = to_json(cr);
        const OrbitOptions oo = orbit_options(sc);
        if (cr.prediction == Prediction::Coexistence) {
            const PeriodicOrbit us = semitrivial_u(spec, oo);
            const PeriodicOrbit vs = semitrivial_v(spec, oo);
            const CoefficientField u_star = us.u_field();
            const auto l = combine(1.0, spec.coefficients.a1, -1.0, spec.coefficients.b1, &u_star);
            const double cert = std::abs(principal_spectrum_point(spec.dispersal, spec.nu1, l, sopt).lambda);
            suite.check("zero_lambda_certificate", cert < 1e-6, cert, 1e-6);
            CoexistenceOptions co;
            co.orbit = oo;
            co.epsilon = sc.run.epsilon;
            const CoexistenceResult r = coexistence_iterate(spec, us, vs, co);
            const double residual = std::max(r.plus.residual, r.minus.residual);
            suite.check("coexistence_residual", residual <= 1e-8, residual, 1e-8);
            const bool both = r.plus.kind == OrbitKind::Coexistence && r.minus.kind == OrbitKind::Coexistence;
            suite.check("coexistence_classified", both, std::min({r.plus.min_u, r.plus.min_v, r.minus.min_u, r.minus.min_v}),
                        r.plus.positivity_floor);
            suite.check("coexistence_sandwich", r.sandwich, r.gap, 0.0);
        } else if (cr.prediction == Prediction::UWins || cr.prediction == Prediction::VWins) {
            const bool v_dies = cr.prediction == Prediction::UWins;
            const PeriodicOrbit survivor = v_dies ? semitrivial_u(spec, oo) : semitrivial_v(spec, oo);
            ExtinctionOptions eo;
            eo.dt = sc.run.dt;
            eo.max_periods = std::min<long>(sc.run.max_periods, 200);
            eo.extinction_tol = sc.run.extinction_tol;
            eo.species = v_dies ? ExtinctSpecies::V : ExtinctSpecies::U;
            const ExtinctionReport r = extinction_run(spec, sc.initial_state(grid), survivor, eo);
            suite.check("extinction", r.extinct, r.final_sup_extinct, sc.run.extinction_tol);
            suite.check("extinction_sandwich", r.sandwich_preserved, r.sandwich_worst_slack, 0.0);
        }
    });

    if (sc.planar) {
        suite.guarded("lemma31", [&] {
            const Lemma31Result r = lemma31_periodic(sc.build_planar());
            suite.check("lemma31_converged", r.converged, r.residual, 1e-8);
            suite.check("lemma31_uniqueness_gap", r.gap <= 1e-8, r.gap, 1e-8);
        });
    }

    Json j = scenario_header(sc);
    j["command"] = "verify";
    j["tolerances"] = tolerances(sc, dt);
    j["criteria"] = criteria;
    j["checks"] = suite.checks();
    j["passed"] = suite.ok();
    return j;
}

}  // namespace lvnd
