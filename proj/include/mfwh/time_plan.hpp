#pragma once

/// @file time_plan.hpp
/// @brief Time-stepping schemes, modified frequencies and the time plan shared by the
/// wave solver and the filters.
///
/// Scheme: D+D- W^n = L(a W^{n+1} + b W^n + a W^{n-1}) - F^n with b = 1 - 2a
///   explicit       a = 0
///   trapezoidal    a = 1/2
///   full weighting a = 1/4

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfwh/error.hpp"

namespace mfwh {

enum class TimeScheme { explicit_leapfrog, trapezoidal, full_weighting };

inline double scheme_alpha(TimeScheme s) {
    switch (s) {
    case TimeScheme::explicit_leapfrog: return 0.0;
    case TimeScheme::trapezoidal: return 0.5;
    case TimeScheme::full_weighting: return 0.25;
    }
    throw Error("unknown time scheme");
}

inline bool is_implicit(TimeScheme s) { return s != TimeScheme::explicit_leapfrog; }

inline const char* to_string(TimeScheme s) {
    switch (s) {
    case TimeScheme::explicit_leapfrog: return "explicit";
    case TimeScheme::trapezoidal: return "trapezoidal";
    case TimeScheme::full_weighting: return "full_weighting";
    }
    return "unknown";
}

inline TimeScheme parse_time_scheme(const std::string& name) {
    if (name == "explicit") return TimeScheme::explicit_leapfrog;
    if (name == "trapezoidal") return TimeScheme::trapezoidal;
    if (name == "full_weighting") return TimeScheme::full_weighting;
    throw Error("unknown time scheme '" + name + "' (expected explicit, trapezoidal or full_weighting)");
}

/// The frequency at which the discrete scheme oscillates when driven at omega:
/// (1/dt) acos((1 - (b/2)(w dt)^2) / (1 + a (w dt)^2)), evaluated through the half-angle
/// form 2 asin(...) to keep full accuracy as w dt -> 0.
inline double modified_frequency(double omega, double dt, double alpha, double beta) {
    if (!(dt > 0.0)) throw Error("modified_frequency: time step must be positive");
    const double x = omega * dt;
    const double s = x * std::sqrt((alpha + 0.5 * beta) / (2.0 * (1.0 + alpha * x * x)));
    if (!(s <= 1.0))
        throw Error("modified_frequency: omega*dt = " + std::to_string(x) + " violates the explicit stability limit");
    return 2.0 * std::asin(s) / dt;
}

struct PlanOptions {
    double cfl = 0.9;               // explicit only
    double steps_per_period = 10.0;  // implicit only, per smallest period
};

struct TimePlan {
    TimeScheme scheme = TimeScheme::trapezoidal;
    double alpha = 0.5;
    double beta = 0.0;
    double dt = 0.0;
    int steps = 0;    // N_t
    int periods = 1;  // N_p
    PlanOptions options;

    std::vector<double> omega;           // pristine
    std::vector<double> omega_tilde;     // modified
    std::vector<double> period_tilde;    // 2 pi / omega_tilde
    std::vector<int> periods_per_freq;   // N_{p,m}
    std::vector<double> filter_horizon;  // N_{p,m} * period_tilde

    int sweeps = 0;  // fixed-point sweeps used to settle dt

    int frequency_count() const { return static_cast<int>(omega.size()); }
    double time(int n) const { return n * dt; }
    double final_time() const { return steps * dt; }
};

/// Builds the plan for sorted frequencies. `lambda_max` bounds the spectral radius of
/// -L_h and is only used by the explicit scheme.
inline TimePlan build_time_plan(std::span<const double> omegas, TimeScheme scheme, int periods, double lambda_max,
                                const PlanOptions& opt = {}) {
    if (omegas.empty()) throw Error("build_time_plan: no frequencies");
    if (periods < 1) throw Error("build_time_plan: number of periods must be at least 1");
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        if (!(omegas[m] > 0.0)) throw Error("build_time_plan: frequencies must be positive");
        if (m > 0 && !(omegas[m] > omegas[m - 1]))
            throw Error("build_time_plan: frequencies must be strictly increasing");
    }

    TimePlan p;
    p.scheme = scheme;
    p.alpha = scheme_alpha(scheme);
    p.beta = 1.0 - 2.0 * p.alpha;
    p.periods = periods;
    p.options = opt;
    p.omega.assign(omegas.begin(), omegas.end());
    const double two_pi = 2.0 * std::numbers::pi;

    double dt = 0.0;
    if (is_implicit(scheme)) {
        if (!(opt.steps_per_period > 0.0)) throw Error("build_time_plan: steps per period must be positive");
        dt = two_pi / omegas.back() / opt.steps_per_period;
    } else {
        if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw Error("build_time_plan: CFL factor must lie in (0, 1]");
        if (!(lambda_max > 0.0)) throw Error("build_time_plan: explicit scheme needs a positive spectral bound");
        dt = opt.cfl * 2.0 / std::sqrt(lambda_max);
        if (omegas.back() * dt > 2.0)
            throw Error("build_time_plan: explicit time step cannot resolve the largest frequency");
    }

    // Settle dt so the longest filter horizon N_p * T~_1(dt) is a whole number of steps.
    // N_t is fixed first; dt is then iterated with N_t held, adding a step if dt ends up
    // above the initial bound.
    auto horizon_at = [&](double h) { return periods * two_pi / modified_frequency(omegas.front(), h, p.alpha, p.beta); };
    const double dt0 = dt;
    int nt = static_cast<int>(std::ceil(horizon_at(dt0) / dt0 - 1e-9));
    p.sweeps = 0;
    for (int attempt = 0; attempt < 10; ++attempt, ++nt) {
        dt = dt0;
        bool settled = false;
        for (int s = 0; s < 100 && !settled; ++s) {
            ++p.sweeps;
            const double next = horizon_at(dt) / nt;
            settled = std::abs(next - dt) <= 1e-14 * dt;
            dt = next;
        }
        if (!settled) throw Error("build_time_plan: time-step fixed point did not settle");
        if (dt <= dt0 * (1.0 + 1e-12)) break;
    }
    if (dt > dt0 * (1.0 + 1e-12)) throw Error("build_time_plan: no step count keeps dt within its bound");
    p.dt = dt;
    p.steps = nt;

    for (double w : omegas) {
        const double wt = modified_frequency(w, dt, p.alpha, p.beta);
        p.omega_tilde.push_back(wt);
        p.period_tilde.push_back(two_pi / wt);
    }
    const double horizon = periods * p.period_tilde.front();
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        const int npm = static_cast<int>(std::floor(horizon / p.period_tilde[m] * (1.0 + 1e-12)));
        if (npm < 1) throw Error("build_time_plan: filter horizon shorter than one period");
        p.periods_per_freq.push_back(npm);
        p.filter_horizon.push_back(std::min(npm * p.period_tilde[m], horizon));
    }
    p.filter_horizon.front() = horizon;

    if (is_implicit(scheme) && p.period_tilde.back() / dt < 5.0)
        throw Error("build_time_plan: fewer than five time steps per period of the largest frequency");
    return p;
}

} // namespace mfwh
