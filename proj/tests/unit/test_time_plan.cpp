#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace mfwh;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TEST(ModifiedFrequency, SmallStepLimit) {
    const double wt = modified_frequency(5.1, 1e-6, 0.5, 0.0);
    EXPECT_LE(std::abs(wt - 5.1) / 5.1, 1e-9);
}

TEST(ModifiedFrequency, ExplicitValue) {
    // (1/0.01) arccos(1 - 0.051^2/2)
    EXPECT_NEAR(modified_frequency(5.1, 0.01, 0.0, 1.0), 5.1005528742932125223, 1e-12);
}

TEST(ModifiedFrequency, TrapezoidalValue) {
    const double dt = two_pi / 10.0 / 5.1;
    EXPECT_NEAR(modified_frequency(5.1, dt, 0.5, 0.0), 4.7272344473296502303, 1e-12);
}

TEST(ModifiedFrequency, ExplicitStabilityLimit) {
    EXPECT_THROW(modified_frequency(10.0, 0.25, 0.0, 1.0), Error);
    EXPECT_THROW(modified_frequency(1.0, 0.0, 0.5, 0.0), Error);
}

TEST(TimeScheme, ParseAndWeights) {
    EXPECT_EQ(parse_time_scheme("trapezoidal"), TimeScheme::trapezoidal);
    EXPECT_EQ(parse_time_scheme("explicit"), TimeScheme::explicit_leapfrog);
    EXPECT_EQ(parse_time_scheme("full_weighting"), TimeScheme::full_weighting);
    EXPECT_THROW(parse_time_scheme("rk4"), Error);
    EXPECT_EQ(scheme_alpha(TimeScheme::full_weighting), 0.25);
}

TEST(BuildTimePlan, SingleFrequency) {
    const std::vector<double> w{5.1};
    for (int np : {1, 3}) {
        const TimePlan p = build_time_plan(w, TimeScheme::trapezoidal, np, 0.0);
        EXPECT_EQ(p.periods_per_freq[0], np);
        EXPECT_DOUBLE_EQ(p.filter_horizon[0], np * p.period_tilde[0]);
        EXPECT_NEAR(p.final_time(), p.filter_horizon[0], 1e-12 * p.filter_horizon[0]);
    }
}

TEST(BuildTimePlan, ThreeFrequencyPeriods) {
    const std::vector<double> w{5.1, 10.1, 15.1};
    const TimePlan p = build_time_plan(w, TimeScheme::trapezoidal, 2, 0.0);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(p.periods_per_freq[m], static_cast<int>(std::floor(2.0 * w[m] / w[0])));
    EXPECT_EQ(p.steps, 60);
    EXPECT_EQ(p.periods_per_freq, (std::vector<int>{2, 3, 5}));
}

TEST(BuildTimePlan, SevenFrequencyPeriods) {
    const std::vector<double> w{15, 21, 26, 32, 41, 49, 58};
    const TimePlan p = build_time_plan(w, TimeScheme::trapezoidal, 6, 0.0);
    EXPECT_EQ(p.periods_per_freq, (std::vector<int>{6, 8, 10, 12, 15, 18, 21}));
}

TEST(BuildTimePlan, HorizonIsWholeSteps) {
    const std::vector<double> w{5.1, 10.1, 15.1};
    for (auto s : {TimeScheme::trapezoidal, TimeScheme::full_weighting}) {
        const TimePlan p = build_time_plan(w, s, 2, 0.0);
        EXPECT_NEAR(p.steps * p.dt, 2.0 * two_pi / p.omega_tilde[0], 1e-12);
        EXPECT_LE(p.dt, two_pi / 15.1 / 10.0 * (1.0 + 1e-12));
        for (std::size_t m = 0; m < 3; ++m) {
            EXPECT_LE(p.filter_horizon[m], p.final_time() * (1.0 + 1e-14));
            EXPECT_NEAR(p.omega_tilde[m], modified_frequency(w[m], p.dt, p.alpha, p.beta), 0.0);
        }
    }
}

TEST(BuildTimePlan, ExplicitUsesCfl) {
    const auto pb = mfwh::testing::three_frequency_problem();
    const Grid g = make_unit_square(32, 2);
    const TimePlan p = build_time_plan(pb, TimeScheme::explicit_leapfrog, 2, g, 2);
    const double bound = gershgorin_bound(assemble_operator(g, 2, pb.bc()));
    EXPECT_LE(p.dt, 0.9 * 2.0 / std::sqrt(bound) * (1.0 + 1e-12));
    EXPECT_EQ(p.alpha, 0.0);
    EXPECT_EQ(p.beta, 1.0);
}

TEST(BuildTimePlan, RejectsBadInput) {
    const std::vector<double> unsorted{9.0, 5.0};
    EXPECT_THROW(build_time_plan(unsorted, TimeScheme::trapezoidal, 1, 0.0), Error);
    const std::vector<double> w{5.0};
    EXPECT_THROW(build_time_plan(w, TimeScheme::trapezoidal, 0, 0.0), Error);
    EXPECT_THROW(build_time_plan(w, TimeScheme::explicit_leapfrog, 1, 0.0), Error);
    PlanOptions opt;
    opt.steps_per_period = 2.0;
    EXPECT_THROW(build_time_plan(w, TimeScheme::trapezoidal, 1, 0.0, opt), Error);
}
