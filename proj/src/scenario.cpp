#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kfgm/harness.hpp"

namespace kfgm {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key))
            throw std::invalid_argument("scenario: unknown key '" + key + "' in " + where);
    }
}

Branch parse_branch(const std::string& s) {
    if (s == "upper") return Branch::Upper;
    if (s == "lower") return Branch::Lower;
    throw std::invalid_argument("scenario: branch must be 'upper' or 'lower'");
}

MajoranaSign parse_sign(const std::string& s) {
    if (s == "plus") return MajoranaSign::Plus;
    if (s == "minus") return MajoranaSign::Minus;
    throw std::invalid_argument("scenario: majorana_sign must be 'plus' or 'minus'");
}

}  // namespace

WrapKind Scenario::wrap() const {
    if (bc.cls == "periodic") return WrapKind::Periodic;
    if (bc.cls == "antiperiodic") return WrapKind::Antiperiodic;
    return WrapKind::None;
}

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    reject_unknown_keys(
        j, {"units", "grid", "bc", "majorana_sign", "seed", "solver", "out_dir"}, "top level");

    Scenario s;
    if (j.contains("units")) {
        const auto& u = j.at("units");
        reject_unknown_keys(u, {"hbar", "m", "c"}, "units");
        s.units.hbar = u.value("hbar", 1.0);
        s.units.m = u.value("m", 1.0);
        s.units.c = u.value("c", 1.0);
        s.units.validate();
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        reject_unknown_keys(g, {"a", "b", "n"}, "grid");
        s.grid = Grid(g.value("a", 0.0), g.value("b", s.grid.b), g.value("n", 256));
    }
    if (j.contains("bc")) {
        const auto& b = j.at("bc");
        reject_unknown_keys(b, {"class", "mu", "branch"}, "bc");
        s.bc.cls = b.value("class", std::string("antiperiodic"));
        const std::set<std::string> known{"periodic", "antiperiodic", "flux_balanced",
                                          "broken_nonunitary"};
        if (!known.contains(s.bc.cls))
            throw std::invalid_argument("scenario: unknown bc class '" + s.bc.cls + "'");
        s.bc.mu = b.value("mu", 1.0);
        if (b.contains("branch")) s.bc.branch = parse_branch(b.at("branch").get<std::string>());
    }
    if (j.contains("majorana_sign")) s.sign = parse_sign(j.at("majorana_sign").get<std::string>());
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("solver")) {
        const auto& v = j.at("solver");
        reject_unknown_keys(v,
                            {"dt_factor", "n_max", "n_modes", "crossings", "mu_samples",
                             "tol_scale", "e_window", "k_list"},
                            "solver");
        s.solver.dt_factor = v.value("dt_factor", 0.2);
        s.solver.n_max = v.value("n_max", 5);
        s.solver.n_modes = v.value("n_modes", 4);
        s.solver.crossings = v.value("crossings", 10);
        s.solver.mu_samples = v.value("mu_samples", 64);
        s.solver.tol_scale = v.value("tol_scale", 1.0);
        if (v.contains("e_window")) {
            const auto w = v.at("e_window");
            if (!w.is_array() || w.size() != 2)
                throw std::invalid_argument("scenario: e_window must be [lo, hi]");
            s.solver.e_window = {w[0].get<double>(), w[1].get<double>()};
        }
        if (v.contains("k_list")) s.solver.k_list = v.at("k_list").get<std::vector<double>>();
        if (!(s.solver.tol_scale > 0.0))
            throw std::invalid_argument("scenario: tol_scale must be positive");
        if (!(s.solver.dt_factor > 0.0))
            throw std::invalid_argument("scenario: dt_factor must be positive");
    }
    if (j.contains("out_dir")) s.out_dir = j.at("out_dir").get<std::string>();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace {

json scenario_json(const Scenario& s) {
    json j;
    j["units"] = {{"hbar", s.units.hbar}, {"m", s.units.m}, {"c", s.units.c}};
    j["grid"] = {{"a", s.grid.a}, {"b", s.grid.b}, {"n", s.grid.n}};
    json bc = {{"class", s.bc.cls}};
    if (s.bc.cls == "flux_balanced") {
        bc["mu"] = s.bc.mu;
        bc["branch"] = to_string(s.bc.branch);
    }
    j["bc"] = bc;
    j["majorana_sign"] = to_string(s.sign);
    j["seed"] = s.seed;
    json solver = {{"dt_factor", s.solver.dt_factor}, {"n_max", s.solver.n_max},
                   {"n_modes", s.solver.n_modes},     {"crossings", s.solver.crossings},
                   {"mu_samples", s.solver.mu_samples}, {"tol_scale", s.solver.tol_scale}};
    if (s.solver.e_window)
        solver["e_window"] = {s.solver.e_window->first, s.solver.e_window->second};
    if (!s.solver.k_list.empty()) solver["k_list"] = s.solver.k_list;
    j["solver"] = solver;
    // out_dir is an execution detail: identical physics scenarios written to
    // different directories must produce byte-identical reports.
    return j;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) { return scenario_json(s).dump(2); }

std::string scenario_hash(const Scenario& s) {
    const std::string text = scenario_to_json(s);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

bool InvariantReport::overall_pass() const {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

void InvariantReport::add(std::string name, std::string claim, double value, double threshold,
                          bool larger_is_better) {
    ReportRow r;
    r.name = std::move(name);
    r.claim = std::move(claim);
    r.value = value;
    r.threshold = threshold;
    r.larger_is_better = larger_is_better;
    r.pass = larger_is_better ? value >= threshold : value <= threshold;
    rows.push_back(std::move(r));
}

void InvariantReport::add_flag(std::string name, std::string claim, bool ok) {
    add(std::move(name), std::move(claim), ok ? 1.0 : 0.0, 1.0, true);
}

std::string InvariantReport::to_json() const {
    json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["scenario"] = scenario_json(scenario);
    j["provenance"] = {{"seed", scenario.seed},
                       {"config_hash", scenario_hash(scenario)},
                       {"version", kVersion}};
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"name", r.name},
                             {"claim", r.claim},
                             {"value", r.value},
                             {"threshold", r.threshold},
                             {"direction", r.larger_is_better ? ">=" : "<="},
                             {"pass", r.pass}});
    }
    j["rows"] = rows_json;
    j["overall_pass"] = overall_pass();
    return j.dump(2) + "\n";
}

void InvariantReport::write(const std::filesystem::path& path) const {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << to_json();
}

}  // namespace kfgm
