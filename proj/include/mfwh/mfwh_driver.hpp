#pragma once

/// @file mfwh_driver.hpp
/// @brief The multi-frequency WaveHoltz map V -> W(V), its fixed-point iteration,
/// GMRES on (I - S_h) V = b_h and the a-posteriori Helmholtz residual check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/krylov.hpp"
#include "mfwh/problem.hpp"
#include "mfwh/stencil.hpp"
#include "mfwh/time_filter.hpp"
#include "mfwh/time_plan.hpp"
#include "mfwh/wave_solver.hpp"

namespace mfwh {

/// One application of the multi-frequency WaveHoltz map: a single forced wave solve
/// from W^0 = sum_m V_m followed by the implicit filter solve.
class MfwhOperator {
public:
    MfwhOperator(const MultiHelmholtzProblem& problem, const Grid& grid, int order, const TimePlan& plan,
                 const ImplicitSolverOptions& opt = {})
        : problem_(problem), order_(order), wave_(problem, grid, order, plan, opt), bank_(plan) {
        for (int m = 0; m < problem.size(); ++m)
            if (problem.component(m).boundary_data) boundary_.push_back(problem.boundary_field(m, grid));
    }

    const Grid& grid() const { return wave_.grid(); }
    const UnknownLayout& layout() const { return wave_.layout(); }
    const TimePlan& plan() const { return wave_.plan(); }
    const FilterBank& bank() const { return bank_; }
    const MultiHelmholtzProblem& problem() const { return problem_; }
    int order() const { return order_; }
    int size() const { return problem_.size(); }
    int wave_solves() const { return wave_.wave_solves(); }

    std::vector<GridFunction> zero() const {
        return std::vector<GridFunction>(static_cast<std::size_t>(size()), GridFunction(grid()));
    }

    std::vector<GridFunction> apply(const std::vector<GridFunction>& v) {
        if (static_cast<int>(v.size()) != size()) throw Error("MfwhOperator: one field per frequency expected");
        GridFunction w0(grid());
        for (const auto& vm : v) w0 += vm;
        FilterAccumulator acc(bank_, grid());
        wave_.solve(w0, [&](int n, const GridFunction& w) { acc.add(n, w); });
        if (!acc.complete()) throw Error("MfwhOperator: filter accumulation incomplete");
        auto out = filter_solve(bank_, acc.filtered());
        finish(out);
        return out;
    }

    /// Concatenated unknown values, one block per frequency.
    std::vector<double> pack(const std::vector<GridFunction>& v) const {
        const std::size_t n = layout().size();
        std::vector<double> x(n * v.size());
        for (std::size_t m = 0; m < v.size(); ++m)
            layout().gather(v[m], std::span<double>(x.data() + m * n, n));
        return x;
    }

    /// Inverse of pack; boundary values and ghosts are filled from the boundary data.
    std::vector<GridFunction> unpack(std::span<const double> x) const {
        const std::size_t n = layout().size();
        if (x.size() != n * static_cast<std::size_t>(size())) throw Error("MfwhOperator: packed size mismatch");
        auto v = zero();
        for (std::size_t m = 0; m < v.size(); ++m) layout().scatter(x.subspan(m * n, n), v[m]);
        finish(v);
        return v;
    }

    void apply_packed(std::span<const double> in, std::span<double> out) {
        const auto r = pack(apply(unpack(in)));
        std::copy(r.begin(), r.end(), out.begin());
    }

private:
    void finish(std::vector<GridFunction>& v) const {
        for (std::size_t m = 0; m < v.size(); ++m)
            fill_ghosts(v[m], problem_.bc(), boundary_.empty() ? nullptr : &boundary_[m], order_);
    }

    MultiHelmholtzProblem problem_;
    int order_;
    WaveSolver wave_;
    FilterBank bank_;
    std::vector<GridFunction> boundary_;
};

/// sqrt( sum_m sum_{Omega_h} (a - b)^2 / (N_f N_a) ) over interior points.
inline double residual(const std::vector<GridFunction>& a, const std::vector<GridFunction>& b) {
    if (a.size() != b.size() || a.empty()) throw Error("residual: iterate sets differ in size");
    const Grid& g = a.front().grid();
    double s = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m)
        for (int j = g.interior(1).lo; j <= g.interior(1).hi; ++j)
            for (int i = g.interior(0).lo; i <= g.interior(0).hi; ++i) {
                const double d = a[m](i, j) - b[m](i, j);
                s += d * d;
            }
    return std::sqrt(s / (static_cast<double>(a.size()) * static_cast<double>(g.interior_count())));
}

/// CR = (r^(N)/r^(1))^(1/N), ECR = CR^(1/N_p); history[k] holds r^(k+1).
inline std::pair<double, double> convergence_rates(std::span<const double> history, int periods) {
    if (history.size() < 2) throw Error("convergence_rates: need at least two residuals");
    if (!(history.front() > 0.0)) throw Error("convergence_rates: first residual is zero");
    if (periods < 1) throw Error("convergence_rates: N_p must be at least 1");
    const double n = static_cast<double>(history.size());
    const double cr = std::pow(history.back() / history.front(), 1.0 / n);
    return {cr, std::pow(cr, 1.0 / periods)};
}

/// Per-m RMS of L_h V_m + w_m^2 V_m - f_m over the unknowns, relative to the RMS of f_m.
inline std::vector<double> helmholtz_residual_check(const std::vector<GridFunction>& v,
                                                    const MultiHelmholtzProblem& problem, const Grid& grid,
                                                    int order) {
    if (static_cast<int>(v.size()) != problem.size()) throw Error("helmholtz_residual_check: one field per frequency");
    const UnknownLayout layout(grid, problem.bc());
    std::vector<double> out;
    for (int m = 0; m < problem.size(); ++m) {
        GridFunction u = v[static_cast<std::size_t>(m)];
        if (!(u.grid() == grid)) throw Error("helmholtz_residual_check: field lives on a different grid");
        const auto gm = problem.boundary_field(m, grid);
        fill_ghosts(u, problem.bc(), gm, order);
        const GridFunction lu = apply_laplacian(u, order, problem.wave_speed());
        const GridFunction f = problem.forcing_field(m, grid);
        const double w2 = problem.omega(m) * problem.omega(m);
        double rr = 0.0, ff = 0.0;
        layout.for_each([&](std::size_t, int i, int j) {
            const double r = lu(i, j) + w2 * u(i, j) - f(i, j);
            rr += r * r;
            ff += f(i, j) * f(i, j);
        });
        out.push_back(ff > 0.0 ? std::sqrt(rr / ff) : std::sqrt(rr / static_cast<double>(layout.size())));
    }
    return out;
}

enum class SolverMode { fpi, gmres };

inline const char* to_string(SolverMode m) { return m == SolverMode::fpi ? "fpi" : "gmres"; }

struct SolverConfig {
    double tolerance = 1e-10;
    int max_iterations = 200;
    int restart = 200;
    double helmholtz_tolerance = 1e-6;
    ImplicitSolverOptions implicit;
    std::vector<GridFunction> initial_guess;  // empty: zero
};

/// Iterates of the fixed-point iteration as seen by an observer.
struct IterateSet {
    const std::vector<GridFunction>* values = nullptr;
    int iteration = 0;
    const std::vector<double>* history = nullptr;
};

struct SolverReport {
    SolverMode mode = SolverMode::fpi;
    int iterations = 0;
    std::vector<double> history;  // FPI: r^(k); GMRES: relative linear residuals
    double cr = 0.0;
    double ecr = 0.0;
    std::vector<double> helmholtz_residuals;
    double wall_time = 0.0;  // seconds
    int wave_solves = 0;
    bool converged = false;
    bool diverged = false;
    std::vector<std::string> diagnostics;
    std::vector<GridFunction> solution;
};

namespace detail {

inline void finish_report(SolverReport& rep, MfwhOperator& op, std::chrono::steady_clock::time_point start) {
    if (rep.history.size() >= 2 && rep.history.front() > 0.0) {
        const auto [cr, ecr] = convergence_rates(rep.history, op.plan().periods);
        rep.cr = cr;
        rep.ecr = ecr;
    }
    rep.helmholtz_residuals = helmholtz_residual_check(rep.solution, op.problem(), op.grid(), op.order());
    rep.wave_solves = op.wave_solves();
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline bool helmholtz_ok(const SolverReport& rep, double tol) {
    for (double r : rep.helmholtz_residuals)
        if (!(r <= tol)) return false;
    return true;
}

} // namespace detail

/// Fixed-point iteration V^(k+1) = W(V^(k)) until r^(k) < tol r^(1).
inline SolverReport run_fpi(MfwhOperator& op, const SolverConfig& cfg,
                            const std::function<void(const IterateSet&)>& observer = {}) {
    const auto start = std::chrono::steady_clock::now();
    SolverReport rep;
    rep.mode = SolverMode::fpi;
    std::vector<GridFunction> v = cfg.initial_guess.empty() ? op.zero() : cfg.initial_guess;
    bool small = false;
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        auto next = op.apply(v);
        rep.history.push_back(residual(next, v));
        v = std::move(next);
        rep.iterations = k;
        if (observer) observer(IterateSet{&v, k, &rep.history});
        const double r1 = rep.history.front();
        const double r = rep.history.back();
        if (k > 1 && r < cfg.tolerance * r1) {
            small = true;
            break;
        }
        if (r1 == 0.0) {
            small = true;
            break;
        }
        if (k > 5 && r > 1e3 * r1) {
            bool growing = true;
            for (int i = 0; i < 5; ++i)
                if (!(rep.history[static_cast<std::size_t>(k - 1 - i)] > rep.history[static_cast<std::size_t>(k - 2 - i)]))
                    growing = false;
            if (growing) {
                rep.diverged = true;
                rep.diagnostics.push_back("fixed-point iteration diverged: residual grew past 1e3 r^(1) for 5 iterations");
                break;
            }
        }
    }
    rep.solution = std::move(v);
    detail::finish_report(rep, op, start);
    rep.converged = small && detail::helmholtz_ok(rep, cfg.helmholtz_tolerance);
    if (small && !rep.converged)
        rep.diagnostics.push_back("iterates stalled but the Helmholtz residual is above tolerance");
    return rep;
}

/// GMRES on (I - S_h) V = b_h with b_h = W(0) and S_h V = W(V) - b_h.
inline SolverReport run_gmres(MfwhOperator& op, const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    SolverReport rep;
    rep.mode = SolverMode::gmres;
    const std::vector<double> b = op.pack(op.apply(op.zero()));
    std::vector<double> x = cfg.initial_guess.empty() ? std::vector<double>(b.size(), 0.0) : op.pack(cfg.initial_guess);
    std::vector<double> tmp(b.size());
    auto a = [&](std::span<const double> in, std::span<double> out) {
        op.apply_packed(in, tmp);
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] - (tmp[k] - b[k]);
    };
    KrylovOptions ko;
    ko.tolerance = cfg.tolerance;
    ko.max_iterations = cfg.max_iterations;
    ko.restart = cfg.restart;
    const KrylovResult kr = gmres(a, b, x, ko);
    rep.iterations = kr.iterations;
    rep.history = kr.history;
    rep.solution = op.unpack(x);
    detail::finish_report(rep, op, start);
    const bool helm = detail::helmholtz_ok(rep, cfg.helmholtz_tolerance);
    rep.converged = kr.converged && helm;
    if (!kr.converged) rep.diagnostics.push_back("GMRES did not reach the tolerance");
    if (kr.converged && !helm)
        rep.diagnostics.push_back("GMRES converged but the Helmholtz residual is large: possible spurious resonance "
                                  "(try a different number of periods)");
    return rep;
}

/// Convenience wrappers building the operator from a problem and plan.
inline SolverReport run_fpi(const MultiHelmholtzProblem& problem, const Grid& grid, int order, const TimePlan& plan,
                            const SolverConfig& cfg = {}) {
    MfwhOperator op(problem, grid, order, plan, cfg.implicit);
    return run_fpi(op, cfg);
}

inline SolverReport run_gmres(const MultiHelmholtzProblem& problem, const Grid& grid, int order, const TimePlan& plan,
                              const SolverConfig& cfg = {}) {
    MfwhOperator op(problem, grid, order, plan, cfg.implicit);
    return run_gmres(op, cfg);
}

} // namespace mfwh
