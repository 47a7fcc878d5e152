#pragma once

/// @file cli.hpp
/// @brief Batch runner behind the `mfwh` executable: one config in, CSV/field/report
/// files out. Exit codes: 0 success, 2 divergence or no convergence, 1 error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfwh/analysis.hpp"
#include "mfwh/config.hpp"
#include "mfwh/error.hpp"
#include "mfwh/helmholtz_reference.hpp"
#include "mfwh/mfwh_driver.hpp"
#include "mfwh/time_filter.hpp"
#include "mfwh/time_plan.hpp"

namespace mfwh {

struct RunOverrides {
    std::optional<RunMode> mode;
    std::optional<std::string> output_directory;
};

namespace detail {

class Report {
public:
    template <class T>
    void add(const std::string& key, const T& value) {
        std::ostringstream os;
        os << std::setprecision(17) << value;
        lines_.emplace_back(key, os.str());
    }
    void add(const std::string& key, const std::vector<double>& v) {
        std::ostringstream os;
        os << std::setprecision(17);
        for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
        lines_.emplace_back(key, os.str());
    }
    void add(const std::string& key, const std::vector<int>& v) {
        std::ostringstream os;
        for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
        lines_.emplace_back(key, os.str());
    }
    void write(const std::filesystem::path& p, std::ostream& echo) const {
        std::ofstream out(p);
        if (!out) throw Error("cannot write " + p.string());
        for (const auto& [k, v] : lines_) {
            out << k << " = " << v << '\n';
            echo << k << " = " << v << '\n';
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << std::setprecision(17);
    return out;
}

inline void write_residuals(const std::filesystem::path& p, const std::vector<double>& h) {
    auto out = open_out(p);
    out << "k,r,cr_running\n";
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double cr = k == 0 || !(h.front() > 0.0) ? 1.0 : std::pow(h[k] / h.front(), 1.0 / static_cast<double>(k + 1));
        out << k + 1 << ',' << h[k] << ',' << cr << '\n';
    }
}

inline void write_mu_curve(const std::filesystem::path& p, const std::vector<MuSample>& s) {
    auto out = open_out(p);
    out << "lambda,mu,abs_mu\n";
    for (const auto& x : s) out << x.lambda << ',' << x.mu << ',' << std::abs(x.mu) << '\n';
}

inline void write_spectrum(const std::filesystem::path& p, const SpectrumInfo& s, const AcrPrediction& a) {
    auto out = open_out(p);
    out << "nu,lambda_h,lambda_tilde,mu_d\n";
    for (std::size_t k = 0; k < s.size(); ++k)
        out << k + 1 << ',' << s.lambda[k] << ',' << a.lambda_tilde[k] << ',' << a.mu_d[k] << '\n';
}

inline void write_fields(const std::filesystem::path& dir, const std::vector<GridFunction>& u) {
    for (std::size_t m = 0; m < u.size(); ++m) {
        auto out = open_out(dir / ("u_m" + std::to_string(m + 1) + ".field"));
        write_field(out, u[m]);
    }
}

inline void add_plan(Report& r, const TimePlan& plan, const FilterBank& bank) {
    r.add("scheme", to_string(plan.scheme));
    r.add("dt", plan.dt);
    r.add("steps", plan.steps);
    r.add("periods", plan.periods);
    r.add("omega", plan.omega);
    r.add("omega_tilde", plan.omega_tilde);
    r.add("periods_per_frequency", plan.periods_per_freq);
    r.add("filter_horizon", plan.filter_horizon);
    std::vector<double> alpha, raw;
    for (int m = 0; m < bank.size(); ++m) {
        alpha.push_back(bank.alpha(m));
        raw.push_back(bank.raw_diagonal(m));
    }
    r.add("filter_alpha", alpha);
    r.add("filter_raw_diagonal", raw);
    r.add("filter_condition", bank.condition_number());
}

inline int threads_from_env(int configured) {
    if (const char* e = std::getenv("MFWH_THREADS")) {
        try {
            const int t = std::stoi(e);
            if (t > 0) return t;
        } catch (const std::exception&) {
        }
        throw ConfigError("MFWH_THREADS", std::string("expected a positive integer, got '") + e + "'");
    }
    return configured;
}

} // namespace detail

/// Runs one configuration; `log` receives the report and diagnostics.
inline int run(RunConfig cfg, const RunOverrides& ov = {}, std::ostream& log = std::cout) {
    if (ov.mode) cfg.mode = *ov.mode;
    if (ov.output_directory) cfg.output_directory = *ov.output_directory;
    const int threads = detail::threads_from_env(cfg.threads);
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif

    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_directory);
    fs::create_directories(dir);

    const Grid grid = cfg.make_grid();
    const MultiHelmholtzProblem problem = cfg.make_problem();
    detail::Report rep;
    rep.add("mode", to_string(cfg.mode));
    rep.add("cells", std::vector<int>(cfg.cells.begin(), cfg.cells.begin() + cfg.dim));
    rep.add("order", cfg.order);

    if (cfg.mode == RunMode::direct) {
        std::vector<GridFunction> u;
        std::vector<double> backward;
        for (int m = 0; m < problem.size(); ++m) {
            HelmholtzSystem sys(problem, grid, cfg.order, m);
            u.push_back(sys.solve());
            backward.push_back(sys.residual());
        }
        rep.add("backward_error", backward);
        rep.add("helmholtz_residual", helmholtz_residual_check(u, problem, grid, cfg.order));
        if (cfg.write_fields) detail::write_fields(dir, u);
        rep.write(dir / "report.txt", log);
        return 0;
    }

    const TimePlan plan = build_time_plan(problem, cfg.scheme, cfg.periods, grid, cfg.order, cfg.plan);
    MfwhOperator op(problem, grid, cfg.order, plan, cfg.implicit);
    detail::add_plan(rep, plan, op.bank());

    const double lmax = cfg.mu_lambda_max ? *cfg.mu_lambda_max : 2.0 * plan.omega.back();
    if (cfg.write_mu_curve)
        detail::write_mu_curve(dir / "mu_curve.csv",
                               sample_mu_curve(cfg.mu_lambda_min, lmax, cfg.mu_samples, plan, op.bank()));

    std::optional<AcrPrediction> acr;
    if (cfg.mode == RunMode::analyze || cfg.write_spectrum || cfg.mode == RunMode::fpi) {
        const SpectrumInfo spec = discrete_spectrum(grid, cfg.order, cfg.bc, false, cfg.wave_speed);
        acr = predict_acr(plan, op.bank(), spec);
        rep.add("acr", acr->acr);
        rep.add("acr_lambda_h", acr->argmax_lambda);
        rep.add("acr_lambda_tilde", acr->argmax_lambda_tilde);
        for (const auto& w : acr->warnings) rep.add("warning", w);
        if (cfg.write_spectrum || cfg.mode == RunMode::analyze) detail::write_spectrum(dir / "spectrum.csv", spec, *acr);
    }
    if (cfg.mode == RunMode::analyze) {
        rep.write(dir / "report.txt", log);
        return 0;
    }

    SolverConfig sc;
    sc.tolerance = cfg.tolerance;
    sc.max_iterations = cfg.max_iterations;
    sc.restart = cfg.restart;
    sc.helmholtz_tolerance = cfg.helmholtz_tolerance;
    sc.implicit = cfg.implicit;
    const RunMode solver = cfg.mode == RunMode::verify ? cfg.verify_solver : cfg.mode;
    const SolverReport sr = solver == RunMode::fpi ? run_fpi(op, sc) : run_gmres(op, sc);

    rep.add("solver", to_string(sr.mode));
    rep.add("iterations", sr.iterations);
    rep.add("wave_solves", sr.wave_solves);
    rep.add("cr", sr.cr);
    rep.add("ecr", sr.ecr);
    rep.add("final_residual", sr.history.empty() ? 0.0 : sr.history.back());
    rep.add("helmholtz_residual", sr.helmholtz_residuals);
    rep.add("converged", sr.converged ? "true" : "false");
    rep.add("diverged", sr.diverged ? "true" : "false");
    rep.add("wall_time", sr.wall_time);
    for (const auto& d : sr.diagnostics) rep.add("diagnostic", d);

    if (cfg.write_residuals) detail::write_residuals(dir / "residuals.csv", sr.history);
    if (cfg.write_fields) detail::write_fields(dir, sr.solution);

    int code = sr.converged ? 0 : 2;
    if (cfg.mode == RunMode::verify) {
        std::vector<double> err;
        const UnknownLayout layout(grid, cfg.bc);
        for (int m = 0; m < problem.size(); ++m) {
            const GridFunction u = solve_direct(problem, grid, cfg.order, m);
            double num = 0.0, den = 0.0;
            layout.for_each([&](std::size_t, int i, int j) {
                const double d = sr.solution[static_cast<std::size_t>(m)](i, j) - u(i, j);
                num = std::max(num, std::abs(d));
                den = std::max(den, std::abs(u(i, j)));
            });
            err.push_back(den > 0.0 ? num / den : num);
        }
        rep.add("relative_error_vs_direct", err);
        bool ok = true;
        for (double e : err) ok = ok && e <= cfg.verify_tolerance;
        rep.add("verified", ok ? "true" : "false");
        if (!ok) code = 2;
    }
    rep.write(dir / "report.txt", log);
    return code;
}

} // namespace mfwh
