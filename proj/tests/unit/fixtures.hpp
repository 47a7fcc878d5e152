#pragma once

#include <random>
#include <vector>

#include "mfwh/mfwh.hpp"

namespace mfwh::testing {

// Three Gaussian sources at w = 5.1, 10.1, 15.1.
inline MultiHelmholtzProblem three_frequency_problem(BoundaryCondition bc = BoundaryCondition::dirichlet()) {
    return MultiHelmholtzProblem({{5.1, GaussianSource{25.0, 15.0, {0.6, 0.45}}, std::nullopt},
                                  {10.1, GaussianSource{100.0, 15.0, {0.4, 0.5}}, std::nullopt},
                                  {15.1, GaussianSource{225.0, 15.0, {0.55, 0.5}}, std::nullopt}},
                                 bc);
}

inline MultiHelmholtzProblem single_frequency_problem(double omega = 5.1,
                                                      BoundaryCondition bc = BoundaryCondition::dirichlet()) {
    return MultiHelmholtzProblem({{omega, GaussianSource{25.0, 15.0, {0.6, 0.45}}, std::nullopt}}, bc);
}

inline GridFunction random_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    GridFunction u(g);
    for (auto& v : u.values()) v = d(rng);
    return u;
}

// Max-norm relative difference over the closure.
inline double relative_error(const GridFunction& a, const GridFunction& b) {
    const Grid& g = a.grid();
    double num = 0.0, den = 0.0;
    for (int j = g.closure(1).lo; j <= g.closure(1).hi; ++j)
        for (int i = g.closure(0).lo; i <= g.closure(0).hi; ++i) {
            num = std::max(num, std::abs(a(i, j) - b(i, j)));
            den = std::max(den, std::abs(b(i, j)));
        }
    return den > 0.0 ? num / den : num;
}

} // namespace mfwh::testing
