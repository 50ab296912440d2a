#include "lvnd/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lvnd/error.hpp"

namespace lvnd {

ForcedPlanarSystem ForcedPlanarSystem::tabulate(double period, const Sampler& sampler, int steps) {
    if (!(period > 0.0)) throw ValidationError("planar system period must be positive");
    if (steps < 1) throw ValidationError("planar system needs at least one step per period");
    ForcedPlanarSystem sys;
    sys.period = period;
    sys.steps = steps;
    const auto count = static_cast<std::size_t>(2 * steps);
    for (auto& column : sys.table) column.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::array<double, 8> values = sampler(period * static_cast<double>(j) / static_cast<double>(count));
        for (std::size_t c = 0; c < 8; ++c) sys.table[c][j] = values[c];
    }
    sys.validate();
    return sys;
}

ForcedPlanarSystem ForcedPlanarSystem::constant(double period, const std::array<double, 8>& values, int steps) {
    return tabulate(period, [values](double) { return values; }, steps);
}

void ForcedPlanarSystem::validate() const {
    static const char* names[] = {"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"};
    for (std::size_t c = 0; c < 8; ++c) {
        for (double value : table[c]) {
            if (!std::isfinite(value)) throw NonFiniteError(std::string("planar coefficient ") + names[c] + " is not finite");
            if (c >= B1 && !(value > 0.0)) {
                throw ValidationError(std::string("planar coefficient ") + names[c] + " must be positive");
            }
        }
    }
}

Range ForcedPlanarSystem::range(Coefficient c) const {
    const auto [lo, hi] = std::minmax_element(table[c].begin(), table[c].end());
    return Range{*lo, *hi};
}

double ForcedPlanarSystem::ratio_margin() const {
    return range(B1).lower / range(B2).upper - range(C1).upper / range(C2).lower;
}

namespace {

class PlanarStepper {
public:
    explicit PlanarStepper(const ForcedPlanarSystem& sys)
        : sys_(sys), h_(sys.period / sys.steps), count_(static_cast<std::size_t>(2 * sys.steps)) {}

    // One RK4 step starting at table index 2k.
    void step(std::size_t k, double& u, double& v) const {
        const std::size_t j0 = (2 * k) % count_;
        const std::size_t j1 = (j0 + 1) % count_;
        const std::size_t j2 = (j0 + 2) % count_;
        double ku1, kv1, ku2, kv2, ku3, kv3, ku4, kv4;
        eval(j0, u, v, ku1, kv1);
        eval(j1, u + 0.5 * h_ * ku1, v + 0.5 * h_ * kv1, ku2, kv2);
        eval(j1, u + 0.5 * h_ * ku2, v + 0.5 * h_ * kv2, ku3, kv3);
        eval(j2, u + h_ * ku3, v + h_ * kv3, ku4, kv4);
        u += h_ / 6.0 * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
        v += h_ / 6.0 * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    }

    // Scalar forced logistic w' = w (a - b w) + d of one species.
    void step_scalar(std::size_t k, int species, double& w) const {
        const std::size_t j0 = (2 * k) % count_;
        const std::size_t j1 = (j0 + 1) % count_;
        const std::size_t j2 = (j0 + 2) % count_;
        const auto& t = sys_.table;
        const auto& a = t[species == 0 ? 0 : 1];
        const auto& b = t[species == 0 ? 2 : 5];
        const auto& d = t[species == 0 ? 6 : 7];
        auto f = [&](std::size_t j, double x) { return x * (a[j] - b[j] * x) + d[j]; };
        const double k1 = f(j0, w);
        const double k2 = f(j1, w + 0.5 * h_ * k1);
        const double k3 = f(j1, w + 0.5 * h_ * k2);
        const double k4 = f(j2, w + h_ * k3);
        w += h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    void period_map(double& u, double& v, std::vector<double>* us = nullptr, std::vector<double>* vs = nullptr,
                    int stride = 0) const {
        for (std::size_t k = 0; k < static_cast<std::size_t>(sys_.steps); ++k) {
            if (us != nullptr && k % static_cast<std::size_t>(stride) == 0) {
                us->push_back(u);
                vs->push_back(v);
            }
            step(k, u, v);
            if (!std::isfinite(u) || !std::isfinite(v)) throw NonFiniteError("planar integration diverged");
        }
        if (us != nullptr) {
            us->push_back(u);
            vs->push_back(v);
        }
    }

private:
    void eval(std::size_t j, double u, double v, double& du, double& dv) const {
        const auto& t = sys_.table;
        du = u * (t[0][j] - t[2][j] * u - t[4][j] * v) + t[6][j];
        dv = v * (t[1][j] - t[3][j] * u - t[5][j] * v) + t[7][j];
    }

    const ForcedPlanarSystem& sys_;
    double h_;
    std::size_t count_;
};

struct CornerRun {
    double u = 0.0;
    double v = 0.0;
    long periods = 0;
    bool converged = false;
};

}  // namespace

std::pair<double, double> forced_logistic_periodic(const ForcedPlanarSystem& sys, int species, double tolerance,
                                                   long max_periods) {
    const auto& a = sys.table[species == 0 ? ForcedPlanarSystem::A1 : ForcedPlanarSystem::A2];
    const auto& b = sys.table[species == 0 ? ForcedPlanarSystem::B1 : ForcedPlanarSystem::C2];
    const auto& d = sys.table[species == 0 ? ForcedPlanarSystem::D1 : ForcedPlanarSystem::D2];
    // Constant super-solution: above the positive root of w (a - b w) + d at every time.
    double w = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        w = std::max(w, (a[j] + std::sqrt(a[j] * a[j] + 4.0 * b[j] * d[j])) / (2.0 * b[j]));
    }
    w += 1.0;
    const PlanarStepper stepper(sys);
    double diff = std::numeric_limits<double>::infinity();
    for (long n = 0; n < max_periods; ++n) {
        double next = w;
        for (std::size_t k = 0; k < static_cast<std::size_t>(sys.steps); ++k) stepper.step_scalar(k, species, next);
        diff = std::abs(next - w);
        w = next;
        if (diff < tolerance * std::max(1.0, w)) break;
    }
    double check = w;
    for (std::size_t k = 0; k < static_cast<std::size_t>(sys.steps); ++k) stepper.step_scalar(k, species, check);
    return {w, std::abs(check - w)};
}

Lemma31Result lemma31_periodic(const ForcedPlanarSystem& sys, const Lemma31Options& options) {
    sys.validate();
    Lemma31Result res;
    res.ratio_margin = sys.ratio_margin();
    if (!(res.ratio_margin > 0.0)) {
        std::ostringstream msg;
        msg << "ratio condition b1L/b2M > c1M/c2L fails (margin " << res.ratio_margin << ")";
        throw HypothesisError(msg.str());
    }
    if (options.slices < 1 || sys.steps % options.slices != 0) {
        throw ValidationError("planar slices must divide the number of steps per period");
    }
    const auto [us, ru] = forced_logistic_periodic(sys, 0);
    const auto [vs, rv] = forced_logistic_periodic(sys, 1);
    res.u_star0 = us;
    res.v_star0 = vs;
    res.aux_residual = std::max(ru, rv);

    const PlanarStepper stepper(sys);
    const double slack = options.monotone_slack;
    // Upper corner decreases in the competitive order, lower corner increases;
    // both stay between (0, v*(0)) and (u*(0), 0).
    auto run = [&](double u, double v, int direction) {
        CornerRun r{u, v, 0, false};
        while (r.periods < options.max_periods) {
            double nu = r.u;
            double nv = r.v;
            stepper.period_map(nu, nv);
            ++r.periods;
            const bool monotone = direction > 0 ? (nu <= r.u + slack && nv >= r.v - slack)
                                                : (nu >= r.u - slack && nv <= r.v + slack);
            const bool bounded = nu >= -slack && nu <= us + slack && nv >= -slack && nv <= vs + slack;
            if (!monotone || !bounded) {
                std::ostringstream msg;
                msg << "planar iteration left the order interval at period " << r.periods << " (u = " << nu
                    << ", v = " << nv << ")";
                throw NumericalError(msg.str());
            }
            const double diff = std::max(std::abs(nu - r.u), std::abs(nv - r.v));
            r.u = nu;
            r.v = nv;
            if (diff < options.tolerance) {
                r.converged = true;
                break;
            }
        }
        return r;
    };
    const CornerRun upper = run(us, 0.0, 1);
    const CornerRun lower = run(0.0, vs, -1);
    res.periods_upper = upper.periods;
    res.periods_lower = lower.periods;
    res.converged = upper.converged && lower.converged;

    const int stride = sys.steps / options.slices;
    auto record = [&](double u, double v, PlanarOrbit& orbit) {
        stepper.period_map(u, v, &orbit.u, &orbit.v, stride);
        for (int j = 0; j <= options.slices; ++j) orbit.t.push_back(sys.period * j / options.slices);
        return std::max(std::abs(u - orbit.u.front()), std::abs(v - orbit.v.front()));
    };
    res.residual = record(upper.u, upper.v, res.orbit);
    record(lower.u, lower.v, res.lower);
    for (std::size_t k = 0; k < res.orbit.u.size(); ++k) {
        res.gap = std::max({res.gap, std::abs(res.orbit.u[k] - res.lower.u[k]), std::abs(res.orbit.v[k] - res.lower.v[k])});
    }
    return res;
}

// ---------------------------------------------------------------------------

namespace {

// Planar systems at the given nodes, tabulated in one sweep over the mesh.
std::vector<ForcedPlanarSystem> node_systems(const SystemSpec& spec, const PeriodicOrbit& orbit,
                                             const std::vector<std::size_t>& nodes, int steps) {
    const double period = spec.period;
    const auto count = static_cast<std::size_t>(2 * steps);
    const auto n = static_cast<Eigen::Index>(spec.size());
    const DispersalOperator& op = *spec.dispersal;
    const auto& c = spec.coefficients;

    std::vector<ForcedPlanarSystem> out(nodes.size());
    for (auto& sys : out) {
        sys.period = period;
        sys.steps = steps;
        for (auto& column : sys.table) column.resize(count);
    }
    Eigen::VectorXd a1(n), a2(n), b1(n), b2(n), c1(n), c2(n), ku(n), kv(n);
    for (std::size_t j = 0; j < count; ++j) {
        const double t = period * static_cast<double>(j) / static_cast<double>(count);
        c.a1.evaluate(t, a1);
        c.a2.evaluate(t, a2);
        c.b1.evaluate(t, b1);
        c.b2.evaluate(t, b2);
        c.c1.evaluate(t, c1);
        c.c2.evaluate(t, c2);
        const StateField s = orbit.at(t);
        ku.noalias() = op.convolution() * s.u;
        kv.noalias() = op.convolution() * s.v;
        for (std::size_t m = 0; m < nodes.size(); ++m) {
            const auto i = static_cast<Eigen::Index>(nodes[m]);
            auto& tab = out[m].table;
            tab[0][j] = a1[i] - spec.nu1 * op.loss()[i];
            tab[1][j] = a2[i] - spec.nu2 * op.loss()[i];
            tab[2][j] = b1[i];
            tab[3][j] = b2[i];
            tab[4][j] = c1[i];
            tab[5][j] = c2[i];
            tab[6][j] = spec.nu1 * ku[i];
            tab[7][j] = spec.nu2 * kv[i];
        }
    }
    return out;
}

ReconstructionReport solve_node(const ForcedPlanarSystem& sys, const PeriodicOrbit& orbit, std::size_t node,
                                const ReconstructionOptions& options) {
    ReconstructionReport rep;
    rep.node = node;
    rep.ratio_margin = sys.ratio_margin();
    rep.ratio_ok = rep.ratio_margin > 0.0;
    if (!rep.ratio_ok) return rep;
    Lemma31Options lemma = options.lemma;
    lemma.slices = static_cast<int>(orbit.slice_count());
    rep.planar = lemma31_periodic(sys, lemma);
    rep.solved = true;
    const auto& slices = orbit.slices().samples;
    const auto i = static_cast<Eigen::Index>(node);
    for (std::size_t k = 0; k < slices.size(); ++k) {
        rep.deviation = std::max({rep.deviation, std::abs(rep.planar.orbit.u[k] - slices[k].u[i]),
                                  std::abs(rep.planar.orbit.v[k] - slices[k].v[i])});
    }
    return rep;
}

void check_orbit(const SystemSpec& spec, const PeriodicOrbit& orbit, const ReconstructionOptions& options) {
    if (orbit.size() != spec.size()) throw ValidationError("orbit does not match the system grid");
    if (orbit.kind != OrbitKind::Coexistence) throw ValidationError("reconstruction needs a coexistence orbit");
    if (options.steps % static_cast<int>(orbit.slice_count()) != 0) {
        throw ValidationError("orbit slices must divide the planar steps per period");
    }
}

}  // namespace

ReconstructionReport reconstruct_pointwise(const SystemSpec& spec, const PeriodicOrbit& orbit, std::size_t node,
                                           const ReconstructionOptions& options) {
    check_orbit(spec, orbit, options);
    if (node >= spec.size()) throw ValidationError("node index out of range");
    const auto systems = node_systems(spec, orbit, {node}, options.steps);
    return solve_node(systems.front(), orbit, node, options);
}

ReconstructionSweep reconstruct_all(const SystemSpec& spec, const PeriodicOrbit& orbit,
                                    const ReconstructionOptions& options) {
    check_orbit(spec, orbit, options);
    ReconstructionSweep sweep;
    constexpr std::size_t kBlock = 16;
    for (std::size_t first = 0; first < spec.size(); first += kBlock) {
        std::vector<std::size_t> block;
        for (std::size_t i = first; i < std::min(spec.size(), first + kBlock); ++i) block.push_back(i);
        const auto systems = node_systems(spec, orbit, block, options.steps);
        for (std::size_t m = 0; m < block.size(); ++m) {
            ReconstructionReport rep = solve_node(systems[m], orbit, block[m], options);
            if (!rep.ratio_ok) ++sweep.ratio_failures;
            sweep.max_deviation = std::max(sweep.max_deviation, rep.deviation);
            sweep.nodes.push_back(std::move(rep));
        }
    }
    return sweep;
}

}  // namespace lvnd
