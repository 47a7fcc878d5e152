#pragma once

/// @file config.hpp
/// @brief INI run configuration for the command-line front end.
///
///   [run]      mode, threads, verify_solver, verify_tolerance
///   [grid]     dim, x_lower, x_upper, y_lower, y_upper, nx, ny, order, bc, bc_<face>, wave_speed
///   [scheme]   time_scheme, periods, steps_per_period, cfl, implicit_backend, implicit_tolerance
///   [solver]   tolerance, max_iterations, restart, helmholtz_tolerance
///   [freq.K]   omega, amplitude, decay, x0, y0   (K = 1, 2, ...)
///   [output]   directory, fields, residuals, mu_curve, spectrum, mu_lambda_min, mu_lambda_max, mu_samples

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/problem.hpp"
#include "mfwh/time_plan.hpp"
#include "mfwh/wave_solver.hpp"

namespace mfwh {

enum class RunMode { fpi, gmres, direct, analyze, verify };

inline const char* to_string(RunMode m) {
    switch (m) {
    case RunMode::fpi: return "fpi";
    case RunMode::gmres: return "gmres";
    case RunMode::direct: return "direct";
    case RunMode::analyze: return "analyze";
    case RunMode::verify: return "verify";
    }
    return "unknown";
}

inline RunMode parse_run_mode(const std::string& s, const std::string& key = "run.mode") {
    if (s == "fpi") return RunMode::fpi;
    if (s == "gmres") return RunMode::gmres;
    if (s == "direct") return RunMode::direct;
    if (s == "analyze") return RunMode::analyze;
    if (s == "verify") return RunMode::verify;
    throw ConfigError(key, "unknown mode '" + s + "' (expected fpi, gmres, direct, analyze or verify)");
}

struct FrequencySpec {
    double omega = 0.0;
    GaussianSource source;
};

struct RunConfig {
    RunMode mode = RunMode::gmres;
    int threads = 0;  // 0: runtime default
    RunMode verify_solver = RunMode::gmres;
    double verify_tolerance = 1e-8;

    int dim = 2;
    std::array<Interval, 2> bounds{Interval{0.0, 1.0}, Interval{0.0, 1.0}};
    std::array<int, 2> cells{64, 64};
    int order = 4;
    BoundaryCondition bc = BoundaryCondition::dirichlet();
    double wave_speed = 1.0;

    TimeScheme scheme = TimeScheme::trapezoidal;
    int periods = 1;
    PlanOptions plan;
    ImplicitSolverOptions implicit;

    double tolerance = 1e-10;
    int max_iterations = 200;
    int restart = 200;
    double helmholtz_tolerance = 1e-6;

    std::vector<FrequencySpec> frequencies;

    std::string output_directory = "mfwh_out";
    bool write_fields = true;
    bool write_residuals = true;
    bool write_mu_curve = true;
    bool write_spectrum = false;
    double mu_lambda_min = 0.0;
    std::optional<double> mu_lambda_max;  // default: 2 * largest frequency
    int mu_samples = 2001;

    Grid make_grid() const {
        return mfwh::make_grid(std::span<const Interval>(bounds.data(), static_cast<std::size_t>(dim)),
                               std::span<const int>(cells.data(), static_cast<std::size_t>(dim)), order);
    }

    MultiHelmholtzProblem make_problem() const {
        std::vector<FrequencyComponent> comps;
        for (const auto& f : frequencies) comps.push_back(FrequencyComponent{f.omega, f.source, std::nullopt});
        return MultiHelmholtzProblem(std::move(comps), bc, wave_speed);
    }
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const boost::property_tree::ptree& t) : tree_(t) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        const auto s = tree_.get_child_optional(boost::property_tree::ptree::path_type(section, '\0'));
        if (!s) return std::nullopt;
        const auto v = s->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        std::string x = *v;
        x.erase(0, x.find_first_not_of(" \t"));
        x.erase(x.find_last_not_of(" \t") + 1);
        return x;
    }

    double real(const std::string& section, const std::string& key, double def) {
        const auto v = raw(section, key);
        if (!v) return def;
        return parse_real(section + "." + key, *v);
    }

    int integer(const std::string& section, const std::string& key, int def) {
        const auto v = raw(section, key);
        if (!v) return def;
        const std::string name = section + "." + key;
        std::size_t pos = 0;
        long long x = 0;
        try {
            x = std::stoll(*v, &pos);
        } catch (const std::exception&) {
            throw ConfigError(name, "expected an integer, got '" + *v + "'");
        }
        if (pos != v->size()) throw ConfigError(name, "expected an integer, got '" + *v + "'");
        if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(name, "integer out of range");
        return static_cast<int>(x);
    }

    bool boolean(const std::string& section, const std::string& key, bool def) {
        const auto v = raw(section, key);
        if (!v) return def;
        if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
        if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
        throw ConfigError(section + "." + key, "expected a boolean, got '" + *v + "'");
    }

    std::string text(const std::string& section, const std::string& key, const std::string& def) {
        const auto v = raw(section, key);
        return v ? *v : def;
    }

    /// Throws on keys that were never read.
    void check_unused() const {
        for (const auto& [section, child] : tree_) {
            if (child.empty() && !child.data().empty())
                throw ConfigError(section, "key outside of any section");
            for (const auto& [key, value] : child)
                if (!used_.count(section + "." + key)) throw ConfigError(section + "." + key, "unknown key");
        }
    }

    const boost::property_tree::ptree& tree() const { return tree_; }

    static double parse_real(const std::string& name, const std::string& v) {
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw ConfigError(name, "expected a number, got '" + v + "'");
        }
        if (pos != v.size() || !std::isfinite(x)) throw ConfigError(name, "expected a finite number, got '" + v + "'");
        return x;
    }

private:
    const boost::property_tree::ptree& tree_;
    std::set<std::string> used_;
};

inline BcKind parse_bc_kind(const std::string& key, const std::string& v) {
    if (v == "dirichlet") return BcKind::dirichlet;
    if (v == "neumann") return BcKind::neumann;
    throw ConfigError(key, "unknown boundary condition '" + v + "' (expected dirichlet or neumann)");
}

} // namespace detail

inline RunConfig parse_run_config(std::istream& is) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("<file>", std::string("malformed INI: ") + e.message() + " at line " +
                                        std::to_string(e.line()));
    }
    detail::ConfigReader rd(tree);
    RunConfig c;

    c.mode = parse_run_mode(rd.text("run", "mode", "gmres"));
    c.threads = rd.integer("run", "threads", 0);
    if (c.threads < 0) throw ConfigError("run.threads", "must be non-negative");
    c.verify_solver = parse_run_mode(rd.text("run", "verify_solver", "gmres"), "run.verify_solver");
    if (c.verify_solver != RunMode::fpi && c.verify_solver != RunMode::gmres)
        throw ConfigError("run.verify_solver", "must be fpi or gmres");
    c.verify_tolerance = rd.real("run", "verify_tolerance", 1e-8);
    if (!(c.verify_tolerance > 0.0)) throw ConfigError("run.verify_tolerance", "must be positive");

    c.dim = rd.integer("grid", "dim", 2);
    if (c.dim != 1 && c.dim != 2) throw ConfigError("grid.dim", "must be 1 or 2");
    c.bounds[0] = {rd.real("grid", "x_lower", 0.0), rd.real("grid", "x_upper", 1.0)};
    c.bounds[1] = {rd.real("grid", "y_lower", 0.0), rd.real("grid", "y_upper", 1.0)};
    const char* axis_key[2][2] = {{"grid.x_lower", "grid.x_upper"}, {"grid.y_lower", "grid.y_upper"}};
    for (int l = 0; l < c.dim; ++l)
        if (!(c.bounds[static_cast<std::size_t>(l)].upper > c.bounds[static_cast<std::size_t>(l)].lower))
            throw ConfigError(axis_key[l][1], std::string("must exceed ") + axis_key[l][0]);
    c.cells[0] = rd.integer("grid", "nx", 64);
    c.cells[1] = rd.integer("grid", "ny", c.cells[0]);
    c.order = rd.integer("grid", "order", 4);
    if (c.order != 2 && c.order != 4) throw ConfigError("grid.order", "must be 2 or 4");
    const int g = ghost_width_for_order(c.order);
    if (c.cells[0] < 4 * g) throw ConfigError("grid.nx", "needs at least " + std::to_string(4 * g) + " cells");
    if (c.dim == 2 && c.cells[1] < 4 * g)
        throw ConfigError("grid.ny", "needs at least " + std::to_string(4 * g) + " cells");
    const BcKind all = detail::parse_bc_kind("grid.bc", rd.text("grid", "bc", "dirichlet"));
    c.bc = BoundaryCondition::uniform(all);
    const char* faces[4] = {"bc_x_lower", "bc_x_upper", "bc_y_lower", "bc_y_upper"};
    for (int f = 0; f < 4; ++f)
        if (const auto v = rd.raw("grid", faces[f]))
            c.bc.kinds[static_cast<std::size_t>(f)] = detail::parse_bc_kind(std::string("grid.") + faces[f], *v);
    c.wave_speed = rd.real("grid", "wave_speed", 1.0);
    if (!(c.wave_speed > 0.0)) throw ConfigError("grid.wave_speed", "must be positive");

    try {
        c.scheme = parse_time_scheme(rd.text("scheme", "time_scheme", "trapezoidal"));
    } catch (const Error& e) {
        throw ConfigError("scheme.time_scheme", e.what());
    }
    c.periods = rd.integer("scheme", "periods", 1);
    if (c.periods < 1) throw ConfigError("scheme.periods", "must be at least 1");
    c.plan.steps_per_period = rd.real("scheme", "steps_per_period", 10.0);
    if (!(c.plan.steps_per_period >= 5.0)) throw ConfigError("scheme.steps_per_period", "must be at least 5");
    c.plan.cfl = rd.real("scheme", "cfl", 0.9);
    if (!(c.plan.cfl > 0.0 && c.plan.cfl <= 1.0)) throw ConfigError("scheme.cfl", "must lie in (0, 1]");
    try {
        c.implicit.backend = parse_implicit_backend(rd.text("scheme", "implicit_backend", "automatic"));
    } catch (const Error& e) {
        throw ConfigError("scheme.implicit_backend", e.what());
    }
    c.implicit.tolerance = rd.real("scheme", "implicit_tolerance", 1e-12);
    if (!(c.implicit.tolerance > 0.0)) throw ConfigError("scheme.implicit_tolerance", "must be positive");

    c.tolerance = rd.real("solver", "tolerance", 1e-10);
    if (!(c.tolerance > 0.0)) throw ConfigError("solver.tolerance", "must be positive");
    c.max_iterations = rd.integer("solver", "max_iterations", 200);
    if (c.max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
    c.restart = rd.integer("solver", "restart", 200);
    if (c.restart < 1) throw ConfigError("solver.restart", "must be at least 1");
    c.helmholtz_tolerance = rd.real("solver", "helmholtz_tolerance", 1e-6);
    if (!(c.helmholtz_tolerance > 0.0)) throw ConfigError("solver.helmholtz_tolerance", "must be positive");

    // [freq.K] sections, K = 1, 2, ... without gaps.
    std::map<int, std::string> freq_sections;
    for (const auto& [name, child] : tree) {
        if (name.rfind("freq.", 0) != 0) continue;
        const std::string idx = name.substr(5);
        std::size_t pos = 0;
        int k = 0;
        try {
            k = std::stoi(idx, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != idx.size() || k < 1) throw ConfigError(name, "frequency sections are named freq.1, freq.2, ...");
        freq_sections[k] = name;
    }
    if (freq_sections.empty()) throw ConfigError("freq.1", "at least one frequency section is required");
    int expect = 1;
    for (const auto& [k, name] : freq_sections) {
        if (k != expect) throw ConfigError("freq." + std::to_string(expect), "missing frequency section");
        ++expect;
        FrequencySpec f;
        if (!rd.raw(name, "omega")) throw ConfigError(name + ".omega", "is required");
        f.omega = rd.real(name, "omega", 0.0);
        if (!(f.omega > 0.0)) throw ConfigError(name + ".omega", "must be positive");
        f.source.amplitude = rd.real(name, "amplitude", 1.0);
        f.source.decay = rd.real(name, "decay", 1.0);
        if (!(f.source.decay > 0.0)) throw ConfigError(name + ".decay", "must be positive");
        f.source.center = {rd.real(name, "x0", 0.5), rd.real(name, "y0", 0.5)};
        if (!c.frequencies.empty() && !(f.omega > c.frequencies.back().omega))
            throw ConfigError(name + ".omega", "frequencies must be strictly increasing");
        c.frequencies.push_back(f);
    }

    c.output_directory = rd.text("output", "directory", "mfwh_out");
    if (c.output_directory.empty()) throw ConfigError("output.directory", "must not be empty");
    c.write_fields = rd.boolean("output", "fields", true);
    c.write_residuals = rd.boolean("output", "residuals", true);
    c.write_mu_curve = rd.boolean("output", "mu_curve", true);
    c.write_spectrum = rd.boolean("output", "spectrum", false);
    c.mu_lambda_min = rd.real("output", "mu_lambda_min", 0.0);
    if (c.mu_lambda_min < 0.0) throw ConfigError("output.mu_lambda_min", "must be non-negative");
    if (rd.raw("output", "mu_lambda_max")) {
        c.mu_lambda_max = rd.real("output", "mu_lambda_max", 0.0);
        if (!(*c.mu_lambda_max > c.mu_lambda_min)) throw ConfigError("output.mu_lambda_max", "must exceed mu_lambda_min");
    }
    c.mu_samples = rd.integer("output", "mu_samples", 2001);
    if (c.mu_samples < 2) throw ConfigError("output.mu_samples", "must be at least 2");

    rd.check_unused();
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read config file '" + path + "'");
    return parse_run_config(in);
}

} // namespace mfwh
