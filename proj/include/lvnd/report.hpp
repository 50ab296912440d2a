#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lvnd/dynamics.hpp"
#include "lvnd/error.hpp"
#include "lvnd/periodic.hpp"
#include "lvnd/scenario.hpp"

namespace lvnd {

using Json = nlohmann::ordered_json;

/// Command-line overrides of the scenario's [run] block.
struct RunOverrides {
    std::optional<double> dt;
    std::optional<long> max_periods;
    std::optional<std::uint64_t> seed;
};

Scenario apply_overrides(Scenario scenario, const RunOverrides& overrides);

/// Exit codes of the command-line tool.
enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitProperty = 4 };

int exit_code_for(const Error& error);

/// Fixed JSON header: scenario name, hash, seed.
Json scenario_header(const Scenario& scenario);

std::string dump_json(const Json& j);
void write_text(const std::string& path, const std::string& text);

/// Trajectory CSV `t,node_index,x[,y],u,v`; header only when empty.
void write_trajectory_csv(const std::string& path, const Grid& grid, const Trajectory& traj);
/// Orbit CSV `slice,t,node_index,x[,y],u,v` over slices 0 .. M-1 (slice M repeats slice 0).
void write_orbit_csv(const std::string& path, const Grid& grid, const PeriodicOrbit& orbit);

Json to_json(const SpectralResult& r, bool with_profile = true);
Json to_json(const CoefficientBounds& b);
Json to_json(const CriteriaReport& r);
Json to_json(const PeriodicOrbit& orbit);
Json to_json(const ExtinctionReport& r);
Json to_json(const Lemma31Result& r);

/// Subcommands. Each writes its artifacts under out_dir and returns the JSON report.
Json run_simulate(const Scenario& scenario, const std::string& out_dir);
Json run_spectrum(const Scenario& scenario, const std::string& out_dir);
Json run_periodic(const Scenario& scenario, const std::string& out_dir);
Json run_criteria(const Scenario& scenario, const std::string& out_dir);
Json run_extinct(const Scenario& scenario, const std::string& out_dir);
Json run_lemma31(const Scenario& scenario, const std::string& out_dir);

/// Property suite on one scenario. The report carries "passed" and one
/// entry per check; it contains no timings, so equal inputs give equal bytes.
Json run_verify(const Scenario& scenario);

}  // namespace lvnd
