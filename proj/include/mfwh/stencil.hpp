#pragma once

/// @file stencil.hpp
/// @brief p-th order (p = 2, 4) finite-difference Laplacians with Dirichlet/Neumann
/// ghost closures, in two independent forms:
///   - fill_ghosts + apply_laplacian act on GridFunctions (used by time stepping)
///   - assemble_operator builds the same operator as a sparse matrix over the
///     unknown layout by folding ghost expressions into the stencil rows
///
/// Ghost closure at a boundary point b with inward neighbours b+s, b+2s, ...:
///   Dirichlet  u_b = g,  u_{b-s} = 2g - u_{b+s}                   (odd reflection of u - g)
///   Neumann    u_{b-s} = u_{b+s} + 2h g                            (D0 u = outward flux g)
///   order 4    u_{b-2s} = 5u_{b-s} - 10u_b + 10u_{b+s} - 5u_{b+2s} + u_{b+3s}

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "mfwh/grid.hpp"
#include "mfwh/sparse.hpp"

namespace mfwh {

namespace detail {

inline void check_order(int order) {
    if (order != 2 && order != 4) throw Error("stencil order must be 2 or 4, got " + std::to_string(order));
}

// Second-derivative weights (without 1/h^2) for offsets -r..r.
inline std::span<const double> second_derivative_weights(int order) {
    static constexpr std::array<double, 3> w2{1.0, -2.0, 1.0};
    static constexpr std::array<double, 5> w4{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
    check_order(order);
    if (order == 2) return w2;
    return w4;
}

constexpr std::array<double, 5> kExtrapolation{5.0, -10.0, 10.0, -5.0, 1.0};

} // namespace detail

/// Fills boundary values (Dirichlet faces) and ghost layers of u. `data` holds the
/// Dirichlet values or outward Neumann fluxes at boundary points; nullptr means zero.
inline void fill_ghosts(GridFunction& u, const BoundaryCondition& bc, const GridFunction* data, int order) {
    detail::check_order(order);
    const Grid& g = u.grid();
    if (data != nullptr && !(data->grid() == g)) throw Error("fill_ghosts: boundary data lives on a different grid");
    if (g.ghost_width() < ghost_width_for_order(order)) throw Error("fill_ghosts: grid has too few ghost layers");

    auto value = [&](int i, int j) { return data ? (*data)(i, j) : 0.0; };

    // Pass 1: Dirichlet boundary values (corners included) before any ghost uses them.
    for (int l = 0; l < g.dim(); ++l) {
        const int t = 1 - l;
        for (int side = 0; side < 2; ++side) {
            const BcKind kind = side == 0 ? bc.lower(l) : bc.upper(l);
            if (kind != BcKind::dirichlet) continue;
            const int b = side == 0 ? 0 : g.cells(l);
            for (int k = g.closure(t).lo; k <= g.closure(t).hi; ++k) {
                const int i = l == 0 ? b : k, j = l == 0 ? k : b;
                u(i, j) = value(i, j);
            }
        }
    }

    // Pass 2: ghost layers along each axis, for every transverse closure index.
    for (int l = 0; l < g.dim(); ++l) {
        const int t = 1 - l;
        const double h = g.spacing(l);
        for (int side = 0; side < 2; ++side) {
            const BcKind kind = side == 0 ? bc.lower(l) : bc.upper(l);
            const int b = side == 0 ? 0 : g.cells(l);
            const int s = side == 0 ? 1 : -1;  // inward step
            for (int k = g.closure(t).lo; k <= g.closure(t).hi; ++k) {
                auto at = [&](int off) -> double& { return l == 0 ? u(b + off * s, k) : u(k, b + off * s); };
                const double gv = l == 0 ? value(b, k) : value(k, b);
                if (kind == BcKind::dirichlet) at(-1) = 2.0 * gv - at(1);
                else at(-1) = at(1) + 2.0 * h * gv;
                if (order == 4) {
                    const auto& e = detail::kExtrapolation;
                    at(-2) = e[0] * at(-1) + e[1] * at(0) + e[2] * at(1) + e[3] * at(2) + e[4] * at(3);
                }
            }
        }
    }
}

inline void fill_ghosts(GridFunction& u, const BoundaryCondition& bc, int order) { fill_ghosts(u, bc, nullptr, order); }
inline void fill_ghosts(GridFunction& u, const BoundaryCondition& bc, const GridFunction& data, int order) {
    fill_ghosts(u, bc, &data, order);
}

/// out = c^2 * (discrete Laplacian of u) at every closure point; zero at ghosts.
/// Ghosts of u must already be consistent with the boundary condition.
inline void apply_laplacian(const GridFunction& u, GridFunction& out, int order, double c = 1.0) {
    const auto w = detail::second_derivative_weights(order);
    const Grid& g = u.grid();
    if (g.ghost_width() < ghost_width_for_order(order)) throw Error("apply_laplacian: grid has too few ghost layers");
    if (!(out.grid() == g)) out = GridFunction(g);
    const int r = order / 2;
    const double c2 = c * c;
    const double ihx = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    const std::ptrdiff_t sx = 1;
    const std::ptrdiff_t sy = g.extent(0);
    const double* uv = u.values().data();
    double* ov = out.values().data();
    const int jlo = g.closure(1).lo, jhi = g.closure(1).hi;
    const int ilo = g.closure(0).lo, ihi = g.closure(0).hi;

    // Zero ghost rows/columns; closure points are overwritten below.
    if (g.ghost_width() > 0) out.fill(0.0);

#pragma omp parallel for schedule(static)
    for (int j = jlo; j <= jhi; ++j) {
        for (int i = ilo; i <= ihi; ++i) {
            const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(g.index(i, j));
            double ax = 0.0, ay = 0.0;
            for (int k = -r; k <= r; ++k) ax += w[k + r] * uv[p + k * sx];
            if (g.dim() == 2)
                for (int k = -r; k <= r; ++k) ay += w[k + r] * uv[p + k * sy];
            ov[p] = c2 * (ihx * ax + ihy * ay);
        }
    }
}

inline GridFunction apply_laplacian(const GridFunction& u, int order, double c = 1.0) {
    GridFunction out(u.grid());
    apply_laplacian(u, out, order, c);
    return out;
}

/// One row of a folded 1D operator: (local unknown index, coefficient) pairs.
using SparseRow = std::vector<std::pair<int, double>>;

/// 1D second-derivative operator along axis l with homogeneous boundary data folded
/// into the rows. Rows and columns are numbered over the unknown range of the axis
/// (Dirichlet ends dropped). Scaled by 1/h^2.
inline std::vector<SparseRow> axis_operator_rows(const Grid& grid, int l, int order, BcKind lower, BcKind upper) {
    const auto w = detail::second_derivative_weights(order);
    const int r = order / 2;
    const int n = grid.cells(l);
    const double ih2 = 1.0 / (grid.spacing(l) * grid.spacing(l));

    // Each extended index e in [-r, n+r] as a combination of closure indices [0, n].
    std::vector<std::map<int, double>> expr(static_cast<std::size_t>(n + 1 + 2 * r));
    auto E = [&](int e) -> std::map<int, double>& { return expr[static_cast<std::size_t>(e + r)]; };
    for (int e = 0; e <= n; ++e) {
        const bool dirichlet_end = (e == 0 && lower == BcKind::dirichlet) || (e == n && upper == BcKind::dirichlet);
        if (!dirichlet_end) E(e)[e] = 1.0;
    }
    for (int side = 0; side < 2; ++side) {
        const BcKind kind = side == 0 ? lower : upper;
        const int b = side == 0 ? 0 : n;
        const int s = side == 0 ? 1 : -1;
        auto& g1 = E(b - s);
        for (const auto& [idx, c] : E(b + s)) g1[idx] += (kind == BcKind::dirichlet ? -c : c);
        if (r == 2) {
            auto& g2 = E(b - 2 * s);
            for (int k = 0; k < 5; ++k)
                for (const auto& [idx, c] : E(b + (k - 1) * s)) g2[idx] += detail::kExtrapolation[k] * c;
        }
    }

    const int lo = lower == BcKind::dirichlet ? 1 : 0;
    const int hi = upper == BcKind::dirichlet ? n - 1 : n;
    std::vector<SparseRow> rows;
    rows.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (int i = lo; i <= hi; ++i) {
        std::map<int, double> acc;
        for (int k = -r; k <= r; ++k)
            for (const auto& [idx, c] : E(i + k)) acc[idx] += w[k + r] * c * ih2;
        SparseRow row;
        for (const auto& [idx, c] : acc)
            if (c != 0.0) row.emplace_back(idx - lo, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Dense 1D operator (row-major, size m x m) for small eigen-analyses.
inline std::vector<double> axis_operator_dense(const Grid& grid, int l, int order, BcKind lower, BcKind upper,
                                               std::size_t* size_out = nullptr) {
    const auto rows = axis_operator_rows(grid, l, order, lower, upper);
    const std::size_t m = rows.size();
    std::vector<double> a(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& [c, v] : rows[i]) a[i * m + static_cast<std::size_t>(c)] += v;
    if (size_out) *size_out = m;
    return a;
}

/// c^2 L_ph over the unknown layout with homogeneous boundary conditions.
inline CsrMatrix assemble_operator(const Grid& grid, int order, const BoundaryCondition& bc, double c = 1.0) {
    detail::check_order(order);
    const UnknownLayout layout(grid, bc);
    const auto xrows = axis_operator_rows(grid, 0, order, bc.lower(0), bc.upper(0));
    std::vector<SparseRow> yrows;
    if (grid.dim() == 2) yrows = axis_operator_rows(grid, 1, order, bc.lower(1), bc.upper(1));
    const double c2 = c * c;
    const int nx = layout.range(0).size();

    std::vector<std::map<std::size_t, double>> rows(layout.size());
    layout.for_each([&](std::size_t k, int i, int j) {
        const int li = i - layout.range(0).lo;
        const int lj = j - layout.range(1).lo;
        auto& row = rows[k];
        for (const auto& [ci, v] : xrows[static_cast<std::size_t>(li)])
            row[static_cast<std::size_t>(lj) * nx + static_cast<std::size_t>(ci)] += c2 * v;
        if (grid.dim() == 2)
            for (const auto& [cj, v] : yrows[static_cast<std::size_t>(lj)])
                row[static_cast<std::size_t>(cj) * nx + static_cast<std::size_t>(li)] += c2 * v;
    });
    return CsrMatrix(layout.size(), rows);
}

/// Contribution of boundary data to c^2 L_ph at the unknowns: L applied to a field that is
/// zero at every unknown and carries the boundary data. Adding this to the assembled
/// operator's action gives the full operator with inhomogeneous data.
inline std::vector<double> boundary_lifting(const GridFunction& data, const BoundaryCondition& bc, int order,
                                            double c = 1.0) {
    const Grid& g = data.grid();
    const UnknownLayout layout(g, bc);
    GridFunction z(g);
    fill_ghosts(z, bc, data, order);
    const GridFunction lz = apply_laplacian(z, order, c);
    return layout.gather(lz);
}

/// Gershgorin bound on the largest |eigenvalue| of an assembled operator.
inline double gershgorin_bound(const CsrMatrix& a) { return a.norm_inf(); }

} // namespace mfwh
