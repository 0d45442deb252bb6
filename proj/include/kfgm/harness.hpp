#pragma once

// Batch front-end: scenario configuration, invariant-suite execution and
// persistent JSON/CSV reports. The CLI binary is a thin shell over these.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kfgm/bc_families.hpp"
#include "kfgm/grid.hpp"
#include "kfgm/solvers.hpp"
#include "kfgm/states.hpp"

namespace kfgm {

inline constexpr const char* kVersion = "0.1.0";

struct BcSpec {
    std::string cls = "antiperiodic";  // periodic | antiperiodic | flux_balanced |
                                       // broken_nonunitary
    double mu = 1.0;                   // flux_balanced only
    Branch branch = Branch::Upper;     // flux_balanced only
};

struct SolverSettings {
    double dt_factor = 0.2;    // dt = dt_factor * dx / c
    int n_max = 5;             // spectrum depth
    int n_modes = 4;           // random-state bandwidth
    int crossings = 10;        // evolution length in wall-to-wall times
    int mu_samples = 64;       // flux-constraint sweep resolution
    double tol_scale = 1.0;    // global tolerance multiplier
    std::optional<std::pair<double, double>> e_window;
    std::vector<double> k_list;  // nonrelativistic sweep; empty -> default
};

struct Scenario {
    UnitsConfig units;
    Grid grid{0.0, 2.0 * 3.14159265358979323846, 256};
    BcSpec bc;
    MajoranaSign sign = MajoranaSign::Plus;
    std::uint64_t seed = 42;
    SolverSettings solver;
    std::string out_dir = "out";

    WrapKind wrap() const;
};

/// Strict parse: unknown keys anywhere are an error (typo protection).
/// Missing keys fall back to defaults. Throws std::invalid_argument with a
/// message naming the offending key.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& s);

/// FNV-1a hash of the canonical scenario serialization.
std::string scenario_hash(const Scenario& s);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportRow {
    std::string name;
    std::string claim;   // the physics statement this row checks
    double value = 0.0;
    double threshold = 0.0;
    bool larger_is_better = false;
    bool pass = false;
};

struct InvariantReport {
    std::string command;
    Scenario scenario;
    std::vector<ReportRow> rows;

    bool overall_pass() const;
    void add(std::string name, std::string claim, double value, double threshold,
             bool larger_is_better = false);
    /// Boolean convenience: value 1 must reach threshold 1.
    void add_flag(std::string name, std::string claim, bool ok);
    std::string to_json() const;
    void write(const std::filesystem::path& path) const;
};

// ---------------------------------------------------------------------------
// Subcommands (each returns its report; the CLI maps pass/fail and signal
// exceptions onto exit codes 0/1/2/3)
// ---------------------------------------------------------------------------

InvariantReport cmd_constrain(const Scenario& s);
InvariantReport cmd_spectrum(const Scenario& s);
InvariantReport cmd_verify(const Scenario& s);
InvariantReport cmd_evolve(const Scenario& s);
InvariantReport cmd_nrlimit(const Scenario& s);

struct ClassifyOutcome {
    BcClass bc_class;
    std::optional<MembershipResult> membership;
    std::string description;
};

/// Classify a boundary-condition input file (see README for the format).
/// Malformed input throws std::invalid_argument.
ClassifyOutcome cmd_classify(const std::string& input_json_text);

// CSV writers (formats shared with the CLI outputs).
void write_field_csv(const std::filesystem::path& path, const FvState& state);
void write_observable_csv(const std::filesystem::path& path, const ObservableField& field);
void write_spectrum_csv(const std::filesystem::path& path, const SpectrumResult& spectrum);
void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& snap, const Grid& g);

}  // namespace kfgm
