#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace mfwh;
using mfwh::testing::random_field;
using mfwh::testing::relative_error;

TEST(Residual, IdenticalIteratesGiveZero) {
    std::mt19937_64 rng(1);
    const Grid g = make_unit_square(8, 2);
    const std::vector<GridFunction> a{random_field(g, rng), random_field(g, rng)};
    EXPECT_EQ(residual(a, a), 0.0);
}

TEST(Residual, ConstantShiftInOneComponent) {
    const Grid g = make_unit_square(8, 2);
    std::vector<GridFunction> a(3, GridFunction(g)), b = a;
    b[1].fill(0.25);
    EXPECT_NEAR(residual(a, b), 0.25 / std::sqrt(3.0), 1e-15);
}

TEST(Residual, MatchesDoubleLoop) {
    std::mt19937_64 rng(2);
    const Grid g = make_unit_square(8, 2);
    const std::vector<GridFunction> a{random_field(g, rng), random_field(g, rng)};
    const std::vector<GridFunction> b{random_field(g, rng), random_field(g, rng)};
    double s = 0.0;
    int count = 0;
    for (int m = 0; m < 2; ++m)
        for (int j = 1; j < 8; ++j)
            for (int i = 1; i < 8; ++i) {
                const double d = a[static_cast<std::size_t>(m)](i, j) - b[static_cast<std::size_t>(m)](i, j);
                s += d * d;
                ++count;
            }
    EXPECT_NEAR(residual(a, b), std::sqrt(s / count), 1e-14);
}

TEST(ConvergenceRates, EffectiveRateNormalizesPeriods) {
    const std::vector<double> h1{1.0, 0.5, 0.25, 0.125};
    const auto [cr1, ecr1] = convergence_rates(h1, 1);
    EXPECT_NEAR(ecr1, cr1, 1e-15);
    const std::vector<double> h{0.3, 0.09, 0.027};
    const auto [cr, ecr] = convergence_rates(h, 2);
    EXPECT_NEAR(cr, std::pow(0.027 / 0.3, 1.0 / 3.0), 1e-15);
    EXPECT_NEAR(ecr, std::sqrt(cr), 1e-15);
    const std::vector<double> quarter{1.0, 0.25 * 0.25 * 0.25 * 0.25};
    EXPECT_NEAR(convergence_rates(quarter, 2).first, 0.25 * 0.25, 1e-15);
    EXPECT_NEAR(convergence_rates(quarter, 2).second, 0.25, 1e-15);
    EXPECT_THROW(convergence_rates(std::vector<double>{1.0}, 1), Error);
}

TEST(MfwhOperator, FixedPointIsDirectSolution) {
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 2, g, 4);
    MfwhOperator op(pb, g, 4, plan);
    const auto u = solve_direct_all(pb, g, 4);
    const auto wu = op.apply(u);
    for (int m = 0; m < 3; ++m) EXPECT_LE(relative_error(wu[static_cast<std::size_t>(m)], u[static_cast<std::size_t>(m)]), 1e-9);
    EXPECT_EQ(op.wave_solves(), 1);
}

TEST(MfwhOperator, AffineInInput) {
    std::mt19937_64 rng(3);
    const Grid g = make_unit_square(16, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 2, g, 4);
    MfwhOperator op(pb, g, 4, plan);
    const auto b = op.apply(op.zero());
    const std::vector<GridFunction> v1{random_field(g, rng), random_field(g, rng), random_field(g, rng)};
    const std::vector<GridFunction> v2{random_field(g, rng), random_field(g, rng), random_field(g, rng)};
    const double a = 0.7, c = -1.3;
    std::vector<GridFunction> mix;
    for (int m = 0; m < 3; ++m) mix.push_back(a * v1[static_cast<std::size_t>(m)] + c * v2[static_cast<std::size_t>(m)]);
    const auto w1 = op.apply(v1), w2 = op.apply(v2), wm = op.apply(mix);
    for (int m = 0; m < 3; ++m) {
        const auto k = static_cast<std::size_t>(m);
        const GridFunction lhs = wm[k] - b[k];
        const GridFunction rhs = a * (w1[k] - b[k]) + c * (w2[k] - b[k]);
        EXPECT_LE((lhs - rhs).max_abs(), 1e-10 * (1.0 + rhs.max_abs()));
    }
}

TEST(MfwhOperator, PackUnpackRoundTrip) {
    std::mt19937_64 rng(4);
    const Grid g = make_unit_square(8, 2);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 1, g, 2);
    MfwhOperator op(pb, g, 2, plan);
    std::vector<double> x(op.layout().size() * 3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : x) v = u(rng);
    EXPECT_EQ(op.pack(op.unpack(x)), x);
}

TEST(MfwhOperator, EigenmodeErrorContractsAtPredictedRate) {
    const Grid g = make_unit_square(24, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 2, g, 4);
    MfwhOperator op(pb, g, 4, plan);
    const SpectrumInfo s = discrete_spectrum(g, 4, pb.bc(), true);
    const auto acr = predict_acr(plan, op.bank(), s);
    const auto u = solve_direct_all(pb, g, 4);
    for (std::size_t nu : {acr.argmax, std::size_t{2}, std::size_t{30}}) {
        GridFunction phi(g);
        op.layout().scatter(s.eigenvector(nu), phi);
        fill_ghosts(phi, pb.bc(), 4);
        std::vector<GridFunction> v = u;
        for (auto& x : v) x += phi;
        std::vector<double> r;
        for (int k = 0; k < 3; ++k) {
            auto next = op.apply(v);
            r.push_back(residual(next, v));
            v = std::move(next);
        }
        const double predicted = std::abs(acr.mu_d[nu]);
        EXPECT_NEAR(r[2] / r[1], predicted, 0.05 * predicted) << "nu = " << nu;
    }
}

TEST(HelmholtzResidualCheck, ZeroInputIsOne) {
    const Grid g = make_unit_square(16, 2);
    const auto pb = mfwh::testing::three_frequency_problem();
    const auto r = helmholtz_residual_check(std::vector<GridFunction>(3, GridFunction(g)), pb, g, 2);
    for (double x : r) EXPECT_NEAR(x, 1.0, 1e-14);
}

TEST(HelmholtzResidualCheck, LinearInPerturbation) {
    std::mt19937_64 rng(5);
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::single_frequency_problem();
    const GridFunction u = solve_direct(pb, g, 4, 0);
    EXPECT_LE(helmholtz_residual_check({u}, pb, g, 4)[0], 1e-11);
    const GridFunction e = random_field(g, rng);
    const double r1 = helmholtz_residual_check({u + 1e-6 * e}, pb, g, 4)[0];
    const double r2 = helmholtz_residual_check({u + 1e-5 * e}, pb, g, 4)[0];
    EXPECT_NEAR(r2 / r1, 10.0, 0.1);
}

TEST(RunFpi, SingleFrequencyMatchesPrediction) {
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::single_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 1, g, 4);
    MfwhOperator op(pb, g, 4, plan);
    const auto acr = predict_acr(plan, op.bank(), discrete_spectrum(g, 4, pb.bc()));
    SolverConfig cfg;
    cfg.tolerance = 1e-9;
    cfg.max_iterations = 400;
    const SolverReport rep = run_fpi(op, cfg);
    EXPECT_TRUE(rep.converged);
    EXPECT_NEAR(rep.cr, acr.acr, 0.15 * acr.acr);
    EXPECT_LE(relative_error(rep.solution[0], solve_direct(pb, g, 4, 0)), 1e-7);
}

TEST(RunFpi, ObserverSeesEveryIterate) {
    const Grid g = make_unit_square(16, 2);
    const auto pb = mfwh::testing::single_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 1, g, 2);
    MfwhOperator op(pb, g, 2, plan);
    SolverConfig cfg;
    cfg.max_iterations = 4;
    int calls = 0;
    const auto rep = run_fpi(op, cfg, [&](const IterateSet& s) {
        ++calls;
        EXPECT_EQ(s.iteration, calls);
        EXPECT_EQ(s.history->size(), static_cast<std::size_t>(calls));
    });
    EXPECT_EQ(calls, 4);
    EXPECT_EQ(rep.iterations, 4);
    EXPECT_FALSE(rep.converged);
}

TEST(RunGmres, ThreeFrequencyMatchesDirect) {
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 2, g, 4);
    const SolverReport rep = run_gmres(pb, g, 4, plan);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.wave_solves, 30);
    const auto u = solve_direct_all(pb, g, 4);
    for (int m = 0; m < 3; ++m)
        EXPECT_LE(relative_error(rep.solution[static_cast<std::size_t>(m)], u[static_cast<std::size_t>(m)]), 1e-8);
    for (double h : rep.helmholtz_residuals) EXPECT_LE(h, 1e-8);
}

TEST(RunGmres, ConvergesWhereFpiDiverges) {
    const Grid g = make_unit_square(32, 4);
    const auto pb = mfwh::testing::three_frequency_problem();
    const TimePlan plan = build_time_plan(pb, TimeScheme::trapezoidal, 1, g, 4);
    MfwhOperator op(pb, g, 4, plan);
    const auto acr = predict_acr(plan, op.bank(), discrete_spectrum(g, 4, pb.bc()));
    ASSERT_GT(acr.acr, 1.0);
    SolverConfig cfg;
    cfg.max_iterations = 60;
    const SolverReport fpi = run_fpi(op, cfg);
    EXPECT_FALSE(fpi.converged);
    EXPECT_GT(fpi.history.back(), fpi.history.front());
    const SolverReport gm = run_gmres(op, SolverConfig{});
    EXPECT_TRUE(gm.converged);
}
