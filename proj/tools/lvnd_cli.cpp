// lvnd: scenario runner for nonlocal competition systems.
//
//   lvnd <simulate|spectrum|periodic|criteria|extinct|lemma31|verify>
//        --scenario FILE [--out DIR] [--dt H] [--max-periods N] [--seed S] [--quiet]

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lvnd/error.hpp"
#include "lvnd/report.hpp"
#include "lvnd/scenario.hpp"

namespace {

void error_line(const std::string& kind, const std::string& message) {
    lvnd::Json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-periodic competition systems with nonlocal dispersal"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<double> dt;
    std::optional<long> max_periods;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    using Runner = std::function<lvnd::Json(const lvnd::Scenario&, const std::string&)>;
    const std::map<std::string, std::pair<std::string, Runner>> commands = {
        {"simulate", {"Integrate the system and write trajectory.csv", lvnd::run_simulate}},
        {"spectrum", {"Principal spectrum point of the [spectrum] block", lvnd::run_spectrum}},
        {"periodic", {"Semitrivial and coexistence orbits", lvnd::run_periodic}},
        {"criteria", {"Coexistence and extinction inequalities", lvnd::run_criteria}},
        {"extinct", {"Extinction run with the comparison system", lvnd::run_extinct}},
        {"lemma31", {"Forced planar system of the [planar] block", lvnd::run_lemma31}},
        {"verify", {"Property suite; exit 4 on any failure", nullptr}},
    };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--dt", dt, "Integrator step (default T/2000)");
        sub->add_option("--max-periods", max_periods, "Cap on Poincare iterations / integrated periods");
        sub->add_option("--seed", seed, "Seed for randomized checks (default 42)");
        sub->add_flag("--quiet", quiet, "Suppress the summary on stdout");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lvnd::kExitValidation;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        lvnd::RunOverrides overrides{dt, max_periods, seed};
        const lvnd::Scenario scenario = lvnd::apply_overrides(lvnd::load_scenario(scenario_path), overrides);
        if (name == "verify") {
            const lvnd::Json report = lvnd::run_verify(scenario);
            lvnd::write_text((std::filesystem::path(out_dir) / "verify.json").string(), lvnd::dump_json(report));
            const bool passed = report["passed"].get<bool>();
            if (!quiet) {
                for (const auto& c : report["checks"]) {
                    std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << '\n';
                }
                std::cout << (passed ? "verify: all checks passed" : "verify: FAILED") << '\n';
            }
            return passed ? lvnd::kExitOk : lvnd::kExitProperty;
        }
        const lvnd::Json report = commands.at(name).second(scenario, out_dir);
        if (!quiet) std::cout << report.dump(2) << '\n';
        return lvnd::kExitOk;
    } catch (const lvnd::Error& e) {
        error_line(lvnd::to_string(e.kind()), e.what());
        return lvnd::exit_code_for(e);
    } catch (const std::exception& e) {
        error_line("io", e.what());
        return lvnd::kExitValidation;
    }
}
