#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lvnd/domain.hpp"
#include "lvnd/dynamics.hpp"
#include "lvnd/fields.hpp"
#include "lvnd/ode.hpp"

namespace lvnd {

/// Scenario file contents.
///
/// The file is a flat TOML-style key/value document:
///
///     [grid]      dimension, extents, nodes, regime
///     [kernel]    radius, profile
///     [system]    nu1, nu2, period, a1 a2 b1 b2 c1 c2 (expressions),
///                 optional <coef>_bounds = [L, M]
///     [run]       dt, max_periods, tolerance, slices, horizon, samples,
///                 extinction_tol, epsilon, seed, u0, v0, extinct
///     [spectrum]  l, nu
///     [planar]    a1 a2 b1 b2 c1 c2 d1 d2 (expressions in t), steps
///
/// Values are numbers, double-quoted strings, booleans, or single-line
/// arrays of numbers. Unknown sections and keys are rejected.
struct Scenario {
    std::string name;
    std::string text;
    std::uint64_t hash = 0;

    int dimension = 1;
    std::vector<double> extents;
    std::vector<int> nodes;
    Regime regime = Regime::NeumannType;

    double radius = 0.0;
    KernelProfile profile = KernelProfile::SmoothBump;

    double nu1 = 1.0;
    double nu2 = 1.0;
    double period = 1.0;
    std::map<std::string, std::string> coefficients;   // a1 .. c2
    std::map<std::string, Range> declared_bounds;

    struct Run {
        std::optional<double> dt;
        long max_periods = 10000;
        double tolerance = 1e-9;
        int slices = 200;
        std::optional<double> horizon;       // default: 5 periods
        int samples = 50;
        double extinction_tol = 1e-6;
        std::optional<double> epsilon;
        std::uint64_t seed = 42;
        std::string u0 = "1";
        std::string v0 = "1";
        std::string extinct;                 // "u", "v", or empty (from the criteria)
    } run;

    struct Spectrum {
        std::string l = "0";
        std::optional<double> nu;
    } spectrum;

    struct Planar {
        std::map<std::string, std::string> coefficients;  // a1 .. d2
        int steps = 20000;
    };
    std::optional<Planar> planar;

    /// Named constants visible to expressions: T, Lx, Ly.
    std::map<std::string, double> constants() const;

    Grid build_grid() const;
    std::shared_ptr<const DispersalOperator> build_dispersal(const Grid& grid) const;
    CoefficientField field(const Grid& grid, const std::string& expression) const;
    SystemSpec build_system() const;
    /// Mesh bounds, with declared bounds taking precedence.
    CoefficientBounds bounds(const SystemSpec& spec, int time_samples = 256) const;
    StateField initial_state(const Grid& grid) const;
    ForcedPlanarSystem build_planar() const;

    std::string hash_hex() const;
};

Scenario parse_scenario(const std::string& text, const std::string& name = "<scenario>");
Scenario load_scenario(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

}  // namespace lvnd
