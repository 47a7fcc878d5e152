#pragma once

/// @file wave_solver.hpp
/// @brief Explicit and implicit second-order time stepping of the forced wave equation
///   (I - a dt^2 L) W^{n+1} = 2W^n - W^{n-1} + dt^2 L(b W^n + a W^{n-1}) - dt^2 F^n
/// with the zero-velocity first step
///   (I - a dt^2 L) W^1 = W^0 + (b/2) dt^2 L W^0 - (dt^2/2) F^0.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfwh/banded_lu.hpp"
#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/krylov.hpp"
#include "mfwh/problem.hpp"
#include "mfwh/sparse.hpp"
#include "mfwh/stencil.hpp"
#include "mfwh/time_plan.hpp"

namespace mfwh {

enum class ImplicitBackend { automatic, banded_lu, cg, gmres };

inline const char* to_string(ImplicitBackend b) {
    switch (b) {
    case ImplicitBackend::automatic: return "automatic";
    case ImplicitBackend::banded_lu: return "banded_lu";
    case ImplicitBackend::cg: return "cg";
    case ImplicitBackend::gmres: return "gmres";
    }
    return "unknown";
}

inline ImplicitBackend parse_implicit_backend(const std::string& s) {
    if (s == "automatic") return ImplicitBackend::automatic;
    if (s == "banded_lu") return ImplicitBackend::banded_lu;
    if (s == "cg") return ImplicitBackend::cg;
    if (s == "gmres") return ImplicitBackend::gmres;
    throw Error("unknown implicit backend '" + s + "' (expected automatic, banded_lu, cg or gmres)");
}

struct ImplicitSolverOptions {
    ImplicitBackend backend = ImplicitBackend::automatic;
    double tolerance = 1e-12;
    int max_iterations = 5000;
    std::size_t banded_memory_limit = std::size_t{1} << 30;  // bytes; automatic switches to Krylov above
};

/// Solves (I - shift * L) x = rhs for a fixed assembled L. The factorization or
/// Krylov setup is built once and reused for every right-hand side.
class ImplicitSolver {
public:
    ImplicitSolver() = default;
    ImplicitSolver(const CsrMatrix& op, double shift, const ImplicitSolverOptions& opt = {})
        : shift_(shift), opt_(opt) {
        if (shift < 0.0) throw Error("ImplicitSolver: shift must be non-negative");
        n_ = op.rows();
        if (shift == 0.0) {
            backend_ = ImplicitBackend::automatic;  // identity
            return;
        }
        matrix_ = op.shifted(1.0, -shift);
        backend_ = opt.backend;
        if (backend_ == ImplicitBackend::automatic) {
            const auto [kl, ku] = matrix_.bandwidths();
            const double bytes = 8.0 * static_cast<double>(2 * kl + ku + 1) * static_cast<double>(n_);
            if (bytes <= static_cast<double>(opt.banded_memory_limit)) backend_ = ImplicitBackend::banded_lu;
            else backend_ = matrix_.is_symmetric() ? ImplicitBackend::cg : ImplicitBackend::gmres;
        }
        if (backend_ == ImplicitBackend::cg && !matrix_.is_symmetric())
            throw Error("ImplicitSolver: conjugate gradient needs a symmetric operator");
        if (backend_ == ImplicitBackend::banded_lu) {
            lu_ = std::make_shared<BandedLU>(matrix_);
            if (lu_->singular()) throw Error("ImplicitSolver: implicit matrix is singular");
        }
    }

    bool identity() const { return shift_ == 0.0; }
    double shift() const { return shift_; }
    ImplicitBackend backend() const { return backend_; }
    std::size_t size() const { return n_; }
    int last_iterations() const { return last_iterations_; }

    /// x holds an initial guess on entry (used by Krylov backends).
    void solve(std::span<const double> rhs, std::span<double> x) {
        if (rhs.size() != n_ || x.size() != n_) throw Error("ImplicitSolver: size mismatch");
        last_iterations_ = 0;
        if (identity()) {
            std::copy(rhs.begin(), rhs.end(), x.begin());
            return;
        }
        if (backend_ == ImplicitBackend::banded_lu) {
            std::copy(rhs.begin(), rhs.end(), x.begin());
            lu_->solve(x);
            return;
        }
        auto op = [this](std::span<const double> in, std::span<double> out) { matrix_.multiply(in, out); };
        KrylovOptions ko;
        ko.tolerance = opt_.tolerance;
        ko.max_iterations = opt_.max_iterations;
        ko.restart = 100;
        const KrylovResult r =
            backend_ == ImplicitBackend::cg ? conjugate_gradient(op, rhs, x, ko) : gmres(op, rhs, x, ko);
        last_iterations_ = r.iterations;
        if (!r.converged)
            throw SolverError(std::string("implicit ") + to_string(backend_) + " solve did not converge", r.iterations,
                              r.residual);
    }

private:
    double shift_ = 0.0;
    ImplicitSolverOptions opt_;
    std::size_t n_ = 0;
    ImplicitBackend backend_ = ImplicitBackend::automatic;
    CsrMatrix matrix_;
    std::shared_ptr<BandedLU> lu_;
    int last_iterations_ = 0;
};

/// Solves (I - shift L) u = rhs at the unknowns, with boundary data folded in by lifting.
/// Returns u with boundary values and ghosts filled.
inline GridFunction implicit_solve(const GridFunction& rhs, double shift, int order, const BoundaryCondition& bc,
                                   const GridFunction* boundary_data = nullptr, double c = 1.0,
                                   const ImplicitSolverOptions& opt = {}) {
    const Grid& g = rhs.grid();
    const UnknownLayout layout(g, bc);
    ImplicitSolver solver(assemble_operator(g, order, bc, c), shift, opt);
    std::vector<double> b = layout.gather(rhs);
    if (boundary_data && shift != 0.0) {
        const auto lift = boundary_lifting(*boundary_data, bc, order, c);
        for (std::size_t k = 0; k < b.size(); ++k) b[k] += shift * lift[k];
    }
    std::vector<double> x(b.size(), 0.0);
    solver.solve(b, x);
    GridFunction u(g);
    layout.scatter(x, u);
    fill_ghosts(u, bc, boundary_data, order);
    return u;
}

struct WaveState {
    GridFunction current;   // W^n
    GridFunction previous;  // W^{n-1}
    int step = 0;
    double time = 0.0;
};

class WaveSolver {
public:
    WaveSolver(const MultiHelmholtzProblem& problem, const Grid& grid, int order, const TimePlan& plan,
               const ImplicitSolverOptions& opt = {})
        : grid_(grid), order_(order), plan_(plan), bc_(problem.bc()), c_(problem.wave_speed()),
          layout_(grid, problem.bc()) {
        if (plan.frequency_count() != problem.size()) throw Error("WaveSolver: plan and problem disagree on N_f");
        op_ = assemble_operator(grid, order, bc_, c_);
        dt2_ = plan.dt * plan.dt;
        solver_ = ImplicitSolver(op_, plan.alpha * dt2_, opt);
        for (int m = 0; m < problem.size(); ++m) {
            forcing_.push_back(layout_.gather(problem.forcing_field(m, grid)));
            if (problem.has_boundary_data()) {
                boundary_.push_back(problem.boundary_field(m, grid));
                lifts_.push_back(boundary_lifting(boundary_.back(), bc_, order, c_));
            }
        }
    }

    const Grid& grid() const { return grid_; }
    const UnknownLayout& layout() const { return layout_; }
    const TimePlan& plan() const { return plan_; }
    const CsrMatrix& operator_matrix() const { return op_; }
    const ImplicitSolver& implicit_solver() const { return solver_; }
    int order() const { return order_; }
    int wave_solves() const { return wave_solves_; }

    /// F^n at the unknowns.
    std::vector<double> forcing(int n) const {
        const auto coef = wave_forcing_coefficients(plan_.time(n), plan_);
        std::vector<double> f(layout_.size(), 0.0);
        for (std::size_t m = 0; m < forcing_.size(); ++m)
            for (std::size_t k = 0; k < f.size(); ++k) f[k] += coef[m] * forcing_[m][k];
        return f;
    }

    /// G^n on the grid, or an empty optional when the problem has no boundary data.
    std::optional<GridFunction> boundary_data(int n) const {
        if (boundary_.empty()) return std::nullopt;
        const auto coef = boundary_forcing_coefficients(plan_.time(n), plan_);
        GridFunction g(grid_);
        for (std::size_t m = 0; m < boundary_.size(); ++m) g.axpy(coef[m], boundary_[m]);
        return g;
    }

    WaveState initial_state(const GridFunction& w0) const {
        if (!(w0.grid() == grid_)) throw Error("WaveSolver: initial data lives on a different grid");
        WaveState s;
        s.current = w0;
        const auto g0 = boundary_data(0);
        fill_ghosts(s.current, bc_, g0 ? &*g0 : nullptr, order_);
        s.previous = GridFunction(grid_);
        return s;
    }

    void first_step(WaveState& s) {
        if (s.step != 0) throw Error("WaveSolver: first_step called at step " + std::to_string(s.step));
        const GridFunction lw = apply_laplacian(s.current, order_, c_);
        const auto f = forcing(0);
        std::vector<double> rhs(layout_.size());
        const double half_b = 0.5 * plan_.beta * dt2_;
        layout_.for_each([&](std::size_t k, int i, int j) {
            rhs[k] = s.current(i, j) + half_b * lw(i, j) - 0.5 * dt2_ * f[k];
        });
        advance(s, rhs);
    }

    void step(WaveState& s) {
        if (s.step < 1) throw Error("WaveSolver: step called before first_step");
        GridFunction mix = plan_.beta * s.current;
        if (plan_.alpha != 0.0) mix.axpy(plan_.alpha, s.previous);
        const GridFunction lw = apply_laplacian(mix, order_, c_);
        const auto f = forcing(s.step);
        std::vector<double> rhs(layout_.size());
        layout_.for_each([&](std::size_t k, int i, int j) {
            rhs[k] = 2.0 * s.current(i, j) - s.previous(i, j) + dt2_ * (lw(i, j) - f[k]);
        });
        advance(s, rhs);
    }

    /// Runs N_t steps from W^0; obs(n, W^n) sees every level n = 0..N_t. Returns W^{N_t}.
    template <class Observer>
    GridFunction solve(const GridFunction& w0, Observer&& obs) {
        WaveState s = initial_state(w0);
        obs(0, static_cast<const GridFunction&>(s.current));
        first_step(s);
        obs(1, static_cast<const GridFunction&>(s.current));
        while (s.step < plan_.steps) {
            step(s);
            obs(s.step, static_cast<const GridFunction&>(s.current));
        }
        ++wave_solves_;
        return s.current;
    }

    GridFunction solve(const GridFunction& w0) {
        return solve(w0, [](int, const GridFunction&) {});
    }

private:
    // Solves for W^{n+1} at the unknowns from the explicit right-hand side, then applies
    // the boundary conditions at t^{n+1}.
    void advance(WaveState& s, std::vector<double>& rhs) {
        const int next = s.step + 1;
        const auto g = boundary_data(next);
        if (!solver_.identity() && !lifts_.empty()) {
            const auto coef = boundary_forcing_coefficients(plan_.time(next), plan_);
            const double shift = solver_.shift();
            for (std::size_t m = 0; m < lifts_.size(); ++m)
                for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += shift * coef[m] * lifts_[m][k];
        }
        std::vector<double> x = layout_.gather(s.current);
        solver_.solve(rhs, x);
        GridFunction w(grid_);
        layout_.scatter(x, w);
        fill_ghosts(w, bc_, g ? &*g : nullptr, order_);
        s.previous = std::move(s.current);
        s.current = std::move(w);
        s.step = next;
        s.time = plan_.time(next);
    }

    Grid grid_;
    int order_;
    TimePlan plan_;
    BoundaryCondition bc_;
    double c_;
    UnknownLayout layout_;
    CsrMatrix op_;
    double dt2_ = 0.0;
    ImplicitSolver solver_;
    std::vector<std::vector<double>> forcing_;
    std::vector<GridFunction> boundary_;
    std::vector<std::vector<double>> lifts_;
    int wave_solves_ = 0;
};

} // namespace mfwh
