#pragma once

/// @file grid.hpp
/// @brief Cartesian tensor grids (1D or 2D) with ghost layers, grid functions,
/// boundary-condition kinds and the unknown layout used by assembled operators.
///
/// Index conventions:
///   - axis l has cells N_l and points j = 0..N_l; j = 0 and j = N_l are boundary points
///   - ghost points extend the index range to -g..N_l+g, g = 1 (order 2) or 2 (order 4)
///   - storage is row-major with x fastest; a 1D grid is a single row without y ghosts

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mfwh/error.hpp"

namespace mfwh {

using Point = std::array<double, 2>;

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    int cells = 0;

    double spacing() const { return (upper - lower) / cells; }
    double coordinate(int j) const { return lower + j * spacing(); }
    friend bool operator==(const Axis&, const Axis&) = default;
};

/// Inclusive index range along one axis.
struct IndexRange {
    int lo = 0;
    int hi = -1;
    int size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

class Grid {
public:
    Grid() = default;
    Grid(int dim, std::array<Axis, 2> axes, int ghost_width)
        : dim_(dim), axes_(axes), ghost_(ghost_width) {}

    int dim() const { return dim_; }
    const Axis& axis(int l) const { return axes_[l]; }
    int cells(int l) const { return l < dim_ ? axes_[l].cells : 0; }
    double spacing(int l) const { return axes_[l].spacing(); }
    int ghost_width() const { return ghost_; }

    /// Ghost width along axis l (zero for the unused y axis of a 1D grid).
    int ghost(int l) const { return l < dim_ ? ghost_ : 0; }

    /// Storage extent along axis l, ghosts included.
    int extent(int l) const { return cells(l) + 1 + 2 * ghost(l); }
    std::size_t storage_size() const {
        return static_cast<std::size_t>(extent(0)) * static_cast<std::size_t>(extent(1));
    }

    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(j + ghost(1)) * static_cast<std::size_t>(extent(0)) +
               static_cast<std::size_t>(i + ghost(0));
    }

    Point point(int i, int j = 0) const {
        return {axes_[0].coordinate(i), dim_ == 2 ? axes_[1].coordinate(j) : 0.0};
    }

    /// Omega_h per axis: strictly interior indices.
    IndexRange interior(int l) const { return l < dim_ ? IndexRange{1, cells(l) - 1} : IndexRange{0, 0}; }
    /// Closure per axis: all non-ghost indices.
    IndexRange closure(int l) const { return l < dim_ ? IndexRange{0, cells(l)} : IndexRange{0, 0}; }

    /// N_a = |Omega_h|.
    std::size_t interior_count() const {
        return static_cast<std::size_t>(interior(0).size()) * static_cast<std::size_t>(interior(1).size());
    }
    std::size_t closure_count() const {
        return static_cast<std::size_t>(closure(0).size()) * static_cast<std::size_t>(closure(1).size());
    }
    std::size_t boundary_count() const { return closure_count() - interior_count(); }

    bool is_boundary(int i, int j = 0) const {
        if (i == 0 || i == cells(0)) return true;
        return dim_ == 2 && (j == 0 || j == cells(1));
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int dim_ = 0;
    std::array<Axis, 2> axes_{};
    int ghost_ = 0;
};

inline int ghost_width_for_order(int order) {
    if (order == 2) return 1;
    if (order == 4) return 2;
    throw Error("spatial order must be 2 or 4, got " + std::to_string(order));
}

/// Builds a 1D or 2D grid; `bounds` and `cells` carry one entry per axis.
inline Grid make_grid(std::span<const Interval> bounds, std::span<const int> cells, int order) {
    if (bounds.empty() || bounds.size() > 2 || bounds.size() != cells.size())
        throw Error("make_grid: need 1 or 2 axes with matching bounds and cell counts");
    const int g = ghost_width_for_order(order);
    std::array<Axis, 2> axes{};
    for (std::size_t l = 0; l < bounds.size(); ++l) {
        if (!(bounds[l].upper > bounds[l].lower) || !std::isfinite(bounds[l].lower) ||
            !std::isfinite(bounds[l].upper))
            throw Error("make_grid: degenerate bounds on axis " + std::to_string(l));
        if (cells[l] < 4 * g)
            throw Error("make_grid: axis " + std::to_string(l) + " needs at least " + std::to_string(4 * g) +
                        " cells for order " + std::to_string(order));
        axes[l] = Axis{bounds[l].lower, bounds[l].upper, cells[l]};
    }
    return Grid(static_cast<int>(bounds.size()), axes, g);
}

inline Grid make_unit_square(int n, int order) {
    const std::array<Interval, 2> b{Interval{0.0, 1.0}, Interval{0.0, 1.0}};
    const std::array<int, 2> c{n, n};
    return make_grid(b, c, order);
}

inline Grid make_unit_interval(int n, int order) {
    const std::array<Interval, 1> b{Interval{0.0, 1.0}};
    const std::array<int, 1> c{n};
    return make_grid(b, c, order);
}

/// Real values at every grid point, ghosts included.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const Grid& grid, double value = 0.0)
        : grid_(grid), values_(grid.storage_size(), value) {}

    const Grid& grid() const { return grid_; }

    double& operator()(int i, int j = 0) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j = 0) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    void fill(double v) { std::fill(values_.begin(), values_.end(), v); }

    GridFunction& operator+=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(double a) {
        for (auto& v : values_) v *= a;
        return *this;
    }
    /// this += a * x
    GridFunction& axpy(double a, const GridFunction& x) {
        check_same(x);
        const double* xv = x.values_.data();
        double* yv = values_.data();
        const std::size_t n = values_.size();
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) yv[k] += a * xv[k];
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

    /// Max |u| over the closure (ghosts excluded).
    double max_abs() const {
        double m = 0.0;
        for (int j = grid_.closure(1).lo; j <= grid_.closure(1).hi; ++j)
            for (int i = grid_.closure(0).lo; i <= grid_.closure(0).hi; ++i)
                m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

private:
    void check_same(const GridFunction& o) const {
        if (!(o.grid_ == grid_)) throw Error("grid function arithmetic on different grids");
    }

    Grid grid_;
    std::vector<double> values_;
};

/// Samples f(x) at every closure point; ghosts stay zero.
template <class F>
GridFunction sample(const Grid& grid, F&& f) {
    GridFunction u(grid);
    for (int j = grid.closure(1).lo; j <= grid.closure(1).hi; ++j)
        for (int i = grid.closure(0).lo; i <= grid.closure(0).hi; ++i) u(i, j) = f(grid.point(i, j));
    return u;
}

enum class BcKind { dirichlet, neumann };

/// Faces are ordered x-lower, x-upper, y-lower, y-upper. y faces are ignored in 1D.
enum class Face { x_lower = 0, x_upper = 1, y_lower = 2, y_upper = 3 };

struct BoundaryCondition {
    std::array<BcKind, 4> kinds{BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet};

    static BoundaryCondition uniform(BcKind k) { return BoundaryCondition{{k, k, k, k}}; }
    static BoundaryCondition dirichlet() { return uniform(BcKind::dirichlet); }
    static BoundaryCondition neumann() { return uniform(BcKind::neumann); }

    BcKind kind(Face f) const { return kinds[static_cast<int>(f)]; }
    BcKind lower(int axis) const { return kinds[2 * axis]; }
    BcKind upper(int axis) const { return kinds[2 * axis + 1]; }

    bool all(BcKind k) const {
        return std::all_of(kinds.begin(), kinds.end(), [k](BcKind x) { return x == k; });
    }
    friend bool operator==(const BoundaryCondition&, const BoundaryCondition&) = default;
};

/// Equation points (unknowns) for a grid/BC pair: Dirichlet boundary points are
/// eliminated, Neumann boundary points are unknowns. The set is a tensor product
/// of one index range per axis, numbered with x fastest.
class UnknownLayout {
public:
    UnknownLayout() = default;
    UnknownLayout(const Grid& grid, const BoundaryCondition& bc) : grid_(grid) {
        for (int l = 0; l < 2; ++l) {
            if (l >= grid.dim()) {
                range_[l] = {0, 0};
                continue;
            }
            range_[l].lo = bc.lower(l) == BcKind::dirichlet ? 1 : 0;
            range_[l].hi = bc.upper(l) == BcKind::dirichlet ? grid.cells(l) - 1 : grid.cells(l);
        }
    }

    const Grid& grid() const { return grid_; }
    const IndexRange& range(int l) const { return range_[l]; }
    std::size_t size() const {
        return static_cast<std::size_t>(range_[0].size()) * static_cast<std::size_t>(range_[1].size());
    }

    bool contains(int i, int j = 0) const {
        return i >= range_[0].lo && i <= range_[0].hi && j >= range_[1].lo && j <= range_[1].hi;
    }
    std::size_t number(int i, int j = 0) const {
        return static_cast<std::size_t>(j - range_[1].lo) * static_cast<std::size_t>(range_[0].size()) +
               static_cast<std::size_t>(i - range_[0].lo);
    }

    template <class F>
    void for_each(F&& f) const {
        std::size_t k = 0;
        for (int j = range_[1].lo; j <= range_[1].hi; ++j)
            for (int i = range_[0].lo; i <= range_[0].hi; ++i) f(k++, i, j);
    }

    void gather(const GridFunction& u, std::span<double> out) const {
        for_each([&](std::size_t k, int i, int j) { out[k] = u(i, j); });
    }
    std::vector<double> gather(const GridFunction& u) const {
        std::vector<double> out(size());
        gather(u, out);
        return out;
    }
    /// Writes unknown values into u; other points are left untouched.
    void scatter(std::span<const double> in, GridFunction& u) const {
        for_each([&](std::size_t k, int i, int j) { u(i, j) = in[k]; });
    }

private:
    Grid grid_;
    std::array<IndexRange, 2> range_{};
};

// Field files: header "nx ny xa xb ya yb" then closure values row-major (x fastest).

inline void write_field(std::ostream& os, const GridFunction& u) {
    const Grid& g = u.grid();
    const Axis& ax = g.axis(0);
    const Axis ay = g.dim() == 2 ? g.axis(1) : Axis{0.0, 0.0, 0};
    os << ax.cells << ' ' << ay.cells << ' ' << std::setprecision(17) << ax.lower << ' ' << ax.upper << ' '
       << ay.lower << ' ' << ay.upper << '\n';
    for (int j = g.closure(1).lo; j <= g.closure(1).hi; ++j)
        for (int i = g.closure(0).lo; i <= g.closure(0).hi; ++i) os << u(i, j) << '\n';
}

/// Reads a field written by write_field onto `grid`; the header must match the grid.
inline GridFunction read_field(std::istream& is, const Grid& grid) {
    int nx = 0, ny = 0;
    double xa = 0, xb = 0, ya = 0, yb = 0;
    if (!(is >> nx >> ny >> xa >> xb >> ya >> yb)) throw Error("read_field: malformed header");
    const Axis ay = grid.dim() == 2 ? grid.axis(1) : Axis{0.0, 0.0, 0};
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); };
    if (nx != grid.cells(0) || ny != ay.cells || !close(xa, grid.axis(0).lower) || !close(xb, grid.axis(0).upper) ||
        !close(ya, ay.lower) || !close(yb, ay.upper))
        throw Error("read_field: header does not match the grid");
    GridFunction u(grid);
    for (int j = grid.closure(1).lo; j <= grid.closure(1).hi; ++j)
        for (int i = grid.closure(0).lo; i <= grid.closure(0).hi; ++i)
            if (!(is >> u(i, j))) throw Error("read_field: truncated value list");
    return u;
}

} // namespace mfwh
