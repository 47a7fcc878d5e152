#pragma once

/// @file problem.hpp
/// @brief The multi-frequency Helmholtz problem set  L u_m + w_m^2 u_m = f_m  and the
/// composite forcings that drive a single wave solve for all of its members.

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/stencil.hpp"
#include "mfwh/time_plan.hpp"

namespace mfwh {

/// a * exp(-b^2 |x - x0|^2)
struct GaussianSource {
    double amplitude = 1.0;
    double decay = 1.0;
    Point center{0.0, 0.0};

    double operator()(const Point& x) const {
        const double dx = x[0] - center[0], dy = x[1] - center[1];
        return amplitude * std::exp(-decay * decay * (dx * dx + dy * dy));
    }
};

/// Interior forcing: a Gaussian or a field tabulated on the solve grid.
using ForcingSpec = std::variant<GaussianSource, GridFunction>;

struct FrequencyComponent {
    double omega = 1.0;
    ForcingSpec forcing = GaussianSource{};
    std::optional<GridFunction> boundary_data;  // Dirichlet values or outward fluxes; zero if absent
};

class MultiHelmholtzProblem {
public:
    MultiHelmholtzProblem(std::vector<FrequencyComponent> components, BoundaryCondition bc = BoundaryCondition::dirichlet(),
                          double wave_speed = 1.0)
        : comps_(std::move(components)), bc_(bc), c_(wave_speed) {
        if (comps_.empty()) throw Error("MultiHelmholtzProblem: at least one frequency is required");
        if (!(c_ > 0.0)) throw Error("MultiHelmholtzProblem: wave speed must be positive");
        for (std::size_t m = 0; m < comps_.size(); ++m) {
            const double w = comps_[m].omega;
            if (!(w > 0.0) || !std::isfinite(w))
                throw Error("MultiHelmholtzProblem: frequency " + std::to_string(m) + " must be positive");
            if (m > 0 && !(w > comps_[m - 1].omega))
                throw Error("MultiHelmholtzProblem: frequencies must be distinct and sorted ascending");
            if (const auto* g = std::get_if<GaussianSource>(&comps_[m].forcing); g && !(g->decay > 0.0))
                throw Error("MultiHelmholtzProblem: Gaussian decay of component " + std::to_string(m) +
                            " must be positive");
        }
    }

    int size() const { return static_cast<int>(comps_.size()); }
    const FrequencyComponent& component(int m) const { return comps_.at(static_cast<std::size_t>(m)); }
    double omega(int m) const { return component(m).omega; }
    std::vector<double> omegas() const {
        std::vector<double> w;
        for (const auto& c : comps_) w.push_back(c.omega);
        return w;
    }
    const BoundaryCondition& bc() const { return bc_; }
    double wave_speed() const { return c_; }

    bool has_boundary_data() const {
        for (const auto& c : comps_)
            if (c.boundary_data) return true;
        return false;
    }

    /// Spatial factor of the Gaussian forcing of component m (0-based).
    double gaussian_source(int m, const Point& x) const {
        if (m < 0 || m >= size()) throw Error("gaussian_source: component index out of range");
        const auto* g = std::get_if<GaussianSource>(&comps_[static_cast<std::size_t>(m)].forcing);
        if (!g) throw Error("gaussian_source: component " + std::to_string(m) + " has a tabulated forcing");
        return (*g)(x);
    }

    /// f_m sampled on the closure of `grid`.
    GridFunction forcing_field(int m, const Grid& grid) const {
        const auto& spec = component(m).forcing;
        if (const auto* g = std::get_if<GaussianSource>(&spec)) return sample(grid, *g);
        const auto& f = std::get<GridFunction>(spec);
        if (!(f.grid() == grid)) throw Error("forcing_field: tabulated forcing lives on a different grid");
        return f;
    }

    /// g_m on `grid` (zero when no data was given).
    GridFunction boundary_field(int m, const Grid& grid) const {
        const auto& g = component(m).boundary_data;
        if (!g) return GridFunction(grid);
        if (!(g->grid() == grid)) throw Error("boundary_field: boundary data lives on a different grid");
        return *g;
    }

private:
    std::vector<FrequencyComponent> comps_;
    BoundaryCondition bc_;
    double c_;
};

/// Time coefficients of the interior forcing: cos(w~_m t)(b + 2a cos(w~_m dt)).
inline std::vector<double> wave_forcing_coefficients(double t, const TimePlan& plan) {
    std::vector<double> c(plan.omega_tilde.size());
    for (std::size_t m = 0; m < c.size(); ++m) {
        const double wt = plan.omega_tilde[m];
        c[m] = std::cos(wt * t) * (plan.beta + 2.0 * plan.alpha * std::cos(wt * plan.dt));
    }
    return c;
}

/// Time coefficients of the boundary forcing: cos(w~_m t).
inline std::vector<double> boundary_forcing_coefficients(double t, const TimePlan& plan) {
    std::vector<double> c(plan.omega_tilde.size());
    for (std::size_t m = 0; m < c.size(); ++m) c[m] = std::cos(plan.omega_tilde[m] * t);
    return c;
}

/// F = sum_m f_m(x) cos(w~_m t)(b + 2a cos(w~_m dt)) from the values f_m(x) at one point.
inline double composite_wave_forcing(std::span<const double> f_at_x, double t, const TimePlan& plan) {
    if (f_at_x.size() != plan.omega_tilde.size()) throw Error("composite_wave_forcing: one value per frequency expected");
    const auto c = wave_forcing_coefficients(t, plan);
    double s = 0.0;
    for (std::size_t m = 0; m < c.size(); ++m) s += f_at_x[m] * c[m];
    return s;
}

/// G = sum_m g_m(x) cos(w~_m t) from the values g_m(x) at one point.
inline double composite_boundary_forcing(std::span<const double> g_at_x, double t, const TimePlan& plan) {
    if (g_at_x.size() != plan.omega_tilde.size())
        throw Error("composite_boundary_forcing: one value per frequency expected");
    const auto c = boundary_forcing_coefficients(t, plan);
    double s = 0.0;
    for (std::size_t m = 0; m < c.size(); ++m) s += g_at_x[m] * c[m];
    return s;
}

/// Composite interior forcing at a point for Gaussian problems.
inline double composite_wave_forcing(const MultiHelmholtzProblem& pb, const Point& x, double t, const TimePlan& plan) {
    std::vector<double> f(static_cast<std::size_t>(pb.size()));
    for (int m = 0; m < pb.size(); ++m) f[static_cast<std::size_t>(m)] = pb.gaussian_source(m, x);
    return composite_wave_forcing(f, t, plan);
}

/// Composite boundary forcing at grid point (i, j).
inline double composite_boundary_forcing(const MultiHelmholtzProblem& pb, int i, int j, double t,
                                         const TimePlan& plan) {
    std::vector<double> g(static_cast<std::size_t>(pb.size()));
    for (int m = 0; m < pb.size(); ++m) {
        const auto& d = pb.component(m).boundary_data;
        g[static_cast<std::size_t>(m)] = d ? (*d)(i, j) : 0.0;
    }
    return composite_boundary_forcing(g, t, plan);
}

/// Plan for a problem on a grid; the explicit scheme takes its step from a Gershgorin
/// bound on the assembled operator.
inline TimePlan build_time_plan(const MultiHelmholtzProblem& pb, TimeScheme scheme, int periods, const Grid& grid,
                                int order, const PlanOptions& opt = {}) {
    double lambda_max = 0.0;
    if (!is_implicit(scheme)) lambda_max = gershgorin_bound(assemble_operator(grid, order, pb.bc(), pb.wave_speed()));
    const auto w = pb.omegas();
    return build_time_plan(w, scheme, periods, lambda_max, opt);
}

} // namespace mfwh
