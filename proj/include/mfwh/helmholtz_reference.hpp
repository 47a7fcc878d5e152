#pragma once

/// @file helmholtz_reference.hpp
/// @brief Direct solution of the discrete Helmholtz systems (L_h + w^2 I) U = f by
/// banded LU; the reference every iterative result is checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mfwh/analysis.hpp"
#include "mfwh/banded_lu.hpp"
#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/problem.hpp"
#include "mfwh/sparse.hpp"
#include "mfwh/stencil.hpp"

namespace mfwh {

class HelmholtzSystem {
public:
    HelmholtzSystem(const MultiHelmholtzProblem& problem, const Grid& grid, int order, int m)
        : grid_(grid), order_(order), bc_(problem.bc()), c_(problem.wave_speed()), omega_(problem.omega(m)),
          layout_(grid, problem.bc()) {
        matrix_ = assemble_operator(grid, order, bc_, c_).shifted(omega_ * omega_, 1.0);
        rhs_ = layout_.gather(problem.forcing_field(m, grid));
        if (problem.component(m).boundary_data) {
            boundary_ = problem.boundary_field(m, grid);
            const auto lift = boundary_lifting(boundary_, bc_, order, c_);
            for (std::size_t k = 0; k < rhs_.size(); ++k) rhs_[k] -= lift[k];
            has_boundary_ = true;
        }
    }

    const CsrMatrix& matrix() const { return matrix_; }
    const std::vector<double>& rhs() const { return rhs_; }
    const UnknownLayout& layout() const { return layout_; }
    double omega() const { return omega_; }

    /// Normwise backward error |Ax - b|_inf / (|A|_inf |x|_inf + |b|_inf) of the last solve.
    double residual() const { return residual_; }

    GridFunction solve() {
        // Tensor-product spectrum: exact singularity test independent of pivoting.
        const auto s = discrete_spectrum(grid_, order_, bc_, false, c_);
        const double w2 = omega_ * omega_;
        double gap = std::numeric_limits<double>::infinity();
        for (double l2 : s.lambda_squared) gap = std::min(gap, std::abs(l2 - w2));
        if (gap <= 1e-12 * matrix_.norm_inf()) resonance();
        BandedLU lu(matrix_);
        if (lu.singular() || lu.min_pivot_ratio() < 1e-14) resonance();
        std::vector<double> x = rhs_;
        lu.solve(x);
        // Up to one step of iterative refinement.
        std::vector<double> r(x.size());
        for (int pass = 0; pass < 2; ++pass) {
            residual_ = backward_error(x, r);
            if (residual_ <= 1e-14 || pass == 1) break;
            lu.solve(r);
            for (std::size_t k = 0; k < x.size(); ++k) x[k] += r[k];
        }
        if (!(residual_ <= 1e-12)) resonance();
        GridFunction u(grid_);
        layout_.scatter(x, u);
        fill_ghosts(u, bc_, has_boundary_ ? &boundary_ : nullptr, order_);
        return u;
    }

private:
    // Stores b - A x in r and returns the backward error.
    double backward_error(const std::vector<double>& x, std::vector<double>& r) const {
        matrix_.multiply(x, r);
        double rn = 0.0, xn = 0.0, bn = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            r[k] = rhs_[k] - r[k];
            rn = std::max(rn, std::abs(r[k]));
            xn = std::max(xn, std::abs(x[k]));
            bn = std::max(bn, std::abs(rhs_[k]));
        }
        const double den = matrix_.norm_inf() * xn + bn;
        return den > 0.0 ? rn / den : 0.0;
    }

    [[noreturn]] void resonance() const {
        const auto s = discrete_spectrum(grid_, order_, bc_, false, c_);
        double best = s.lambda.front();
        for (double l : s.lambda)
            if (std::abs(l - omega_) < std::abs(best - omega_)) best = l;
        throw ResonanceError("Helmholtz system at omega = " + std::to_string(omega_) +
                                 " is singular; nearest discrete eigenvalue lambda_h = " + std::to_string(best),
                             best);
    }

    Grid grid_;
    int order_;
    BoundaryCondition bc_;
    double c_;
    double omega_;
    UnknownLayout layout_;
    CsrMatrix matrix_;
    std::vector<double> rhs_;
    GridFunction boundary_;
    bool has_boundary_ = false;
    double residual_ = 0.0;
};

/// U_m for component m (0-based).
inline GridFunction solve_direct(const MultiHelmholtzProblem& problem, const Grid& grid, int order, int m) {
    HelmholtzSystem sys(problem, grid, order, m);
    return sys.solve();
}

/// U_m for every component.
inline std::vector<GridFunction> solve_direct_all(const MultiHelmholtzProblem& problem, const Grid& grid, int order) {
    std::vector<GridFunction> u;
    for (int m = 0; m < problem.size(); ++m) u.push_back(solve_direct(problem, grid, order, m));
    return u;
}

} // namespace mfwh
