#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace mfwh;
using mfwh::testing::relative_error;

TEST(SolveDirect, EigenvectorForcing) {
    const Grid g = make_unit_square(16, 2);
    const BoundaryCondition bc = BoundaryCondition::dirichlet();
    const SpectrumInfo s = discrete_spectrum(g, 2, bc, true);
    const UnknownLayout layout(g, bc);
    const double w = 7.3;
    for (std::size_t nu : {0u, 3u, 40u}) {
        const auto phi = s.eigenvector(nu);
        GridFunction f(g);
        layout.scatter(phi, f);
        const MultiHelmholtzProblem pb({FrequencyComponent{w, f}}, bc);
        const GridFunction u = solve_direct(pb, g, 2, 0);
        const double scale = 1.0 / (w * w - s.lambda_squared[nu]);
        layout.for_each([&](std::size_t k, int i, int j) { EXPECT_NEAR(u(i, j), scale * phi[k], 1e-11 * std::abs(scale)); });
    }
}

TEST(SolveDirect, NegativeDefiniteRegime) {
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::single_frequency_problem(1.0);
    HelmholtzSystem sys(pb, g, 4, 0);
    sys.solve();
    EXPECT_LE(sys.residual(), 1e-12);
}

TEST(SolveDirect, ResidualBelowTolerance) {
    const Grid g = make_unit_square(64, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    for (int m = 0; m < 3; ++m) {
        HelmholtzSystem sys(pb, g, 4, m);
        const GridFunction u = sys.solve();
        EXPECT_LE(sys.residual(), 1e-12);
        EXPECT_LE(helmholtz_residual_check({u}, MultiHelmholtzProblem({pb.component(m)}), g, 4)[0], 1e-11);
    }
}

TEST(SolveDirect, ResonanceNamesNearestEigenvalue) {
    const Grid g = make_unit_square(16, 2);
    const SpectrumInfo s = discrete_spectrum(g, 2, BoundaryCondition::dirichlet());
    const double w = s.lambda[5];
    const auto pb = mfwh::testing::single_frequency_problem(w);
    try {
        solve_direct(pb, g, 2, 0);
        FAIL() << "expected a resonance error";
    } catch (const ResonanceError& e) {
        EXPECT_NEAR(e.nearest_eigenvalue(), w, 1e-12 * w);
    }
}

TEST(SolveDirect, InhomogeneousDirichletMatchesExactSolution) {
    // u = sin(kx x) cos(ky y) with kx^2 + ky^2 != w^2 solves u'' + w^2 u = (w^2 - k^2) u.
    const double kx = 2.0, ky = 3.0, w = 4.5;
    auto exact = [&](const Point& x) { return std::sin(kx * x[0] + 0.3) * std::cos(ky * x[1]); };
    std::vector<double> err;
    for (int n : {16, 32}) {
        const Grid g = make_unit_square(n, 2);
        GridFunction f = sample(g, [&](const Point& x) { return (w * w - kx * kx - ky * ky) * exact(x); });
        GridFunction b = sample(g, exact);
        const MultiHelmholtzProblem pb({FrequencyComponent{w, f, b}});
        const GridFunction u = solve_direct(pb, g, 2, 0);
        err.push_back(relative_error(u, sample(g, exact)));
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2);
}

TEST(SolveDirect, OrdersAgreeUnderRefinement) {
    const auto pb = mfwh::testing::single_frequency_problem();
    std::vector<double> d;
    for (int n : {32, 64}) {
        const Grid g = make_unit_square(n, 4);
        const GridFunction u4 = solve_direct(pb, g, 4, 0);
        const GridFunction u2 = solve_direct(pb, g, 2, 0);
        d.push_back(relative_error(u2, u4));
    }
    EXPECT_LT(d[1], d[0] / 3.0);
}
