// Command-line front end: scenario-driven constraint derivations, spectra,
// time evolution and the invariant suite, with JSON/CSV reports.
//
// Exit codes: 0 all checks pass, 1 invariant failure, 2 solver or
// configuration refusal, 3 malformed input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kfgm/errors.hpp"
#include "kfgm/harness.hpp"

namespace {

using namespace kfgm;

void print_report(const InvariantReport& rep) {
    for (const auto& row : rep.rows) {
        std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.name << ": value=" << row.value
                  << (row.larger_is_better ? " >= " : " <= ") << row.threshold << "  ("
                  << row.claim << ")\n";
    }
    std::cout << (rep.overall_pass() ? "overall: PASS" : "overall: FAIL") << "\n";
}

int run_report_command(const Scenario& scenario, const std::string& name) {
    InvariantReport rep;
    if (name == "constrain") {
        rep = cmd_constrain(scenario);
        rep.write(std::filesystem::path(scenario.out_dir) / "report.json");
    } else if (name == "spectrum") {
        rep = cmd_spectrum(scenario);
    } else if (name == "verify") {
        rep = cmd_verify(scenario);
    } else if (name == "evolve") {
        rep = cmd_evolve(scenario);
    } else {
        rep = cmd_nrlimit(scenario);
    }
    print_report(rep);
    return rep.overall_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-condition solvers and invariant checks for a strictly neutral "
                 "spin-0 particle on an interval"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string classify_input;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int grid_n = 0;
    double tol_scale = 0.0;

    app.add_option("--config", config_path, "Scenario JSON file");
    app.add_option("--out", out_dir, "Output directory (overrides the scenario)");
    app.add_option("--seed", seed, "Seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--grid", grid_n, "Grid sample-count override");
    app.add_option("--tol-scale", tol_scale, "Tolerance multiplier override");

    auto* constrain = app.add_subcommand("constrain", "Run the boundary-condition derivation chain");
    auto* classify = app.add_subcommand("classify", "Classify a boundary-condition input file");
    classify->add_option("input", classify_input, "Input JSON file")->required();
    auto* spectrum = app.add_subcommand("spectrum", "Stationary spectrum with residual columns");
    auto* verify = app.add_subcommand("verify", "Full invariant suite");
    auto* evolve = app.add_subcommand("evolve", "Leapfrog evolution with conservation checks");
    auto* nrlimit = app.add_subcommand("nrlimit", "Nonrelativistic scaling experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    Scenario scenario;
    try {
        if (!config_path.empty()) scenario = load_scenario_file(config_path);
        if (!out_dir.empty()) scenario.out_dir = out_dir;
        if (seed_set) scenario.seed = seed;
        if (grid_n > 0) scenario.grid = Grid(scenario.grid.a, scenario.grid.b, grid_n);
        if (tol_scale > 0.0) scenario.solver.tol_scale = tol_scale;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    try {
        if (classify->parsed()) {
            std::ifstream in(classify_input);
            if (!in) {
                std::cerr << "error: cannot open '" << classify_input << "'\n";
                return 3;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            ClassifyOutcome outcome;
            try {
                outcome = cmd_classify(buf.str());
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 3;
            }
            std::cout << outcome.description << "\n";
            return 0;
        }
        const std::string name = constrain->parsed()  ? "constrain"
                                 : spectrum->parsed() ? "spectrum"
                                 : verify->parsed()   ? "verify"
                                 : evolve->parsed()   ? "evolve"
                                 : nrlimit->parsed()  ? "nrlimit"
                                                      : "";
        return run_report_command(scenario, name);
    } catch (const CflViolationError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const SeparatedBranchError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const InternalConsistencyError& e) {
        std::cerr << "internal consistency failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    }
}
