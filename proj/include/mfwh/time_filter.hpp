#pragma once

/// @file time_filter.hpp
/// @brief WaveHoltz filter functions, quadrature weights, the filter matrix A and
/// streaming accumulation of the filtered time integrals.
///
/// Continuous filter:  beta(l; w, T, a) = (2/T) int_0^T (cos wt - a/2) cos lt dt
/// Discrete filter:    beta_d^m(l) = c_m sum_n s_{n,m} (cos w~_m t^n - a_m/2) cos l t^n
/// where c_m normalizes beta_d^m(w~_m) = 1 (c_m = 2/T~_{f,m} when the horizon is
/// a whole number of steps).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/time_plan.hpp"

namespace mfwh {

/// sin(x)/x with a series branch near zero.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

inline double beta_continuous(double lambda, double omega, double T, double alpha) {
    if (!(T > 0.0)) throw Error("beta_continuous: T must be positive");
    return sinc((omega - lambda) * T) + sinc((omega + lambda) * T) - alpha * sinc(lambda * T);
}

/// a_m = tan(w~ dt / 2) / tan(w~ dt)
inline double alpha_shift(double omega_tilde, double dt) {
    const double x = omega_tilde * dt;
    if (!(x > 0.0) || x >= std::numbers::pi) throw Error("alpha_shift: omega~*dt must lie in (0, pi)");
    if (x == std::numbers::pi / 2) return 0.0;
    return std::tan(0.5 * x) / std::tan(x);
}

/// Composite trapezoid on [0, T_f] over the grid t^n = n dt, n = 0..N_t, with a
/// linear-interpolation partial cell when T_f ends inside a step.
struct QuadratureRule {
    int q = 0;           // t^q <= T_f < t^{q+1}
    double theta = 0.0;  // (T_f - t^q) / dt
    std::vector<double> weights;  // size N_t + 1
};

inline QuadratureRule quadrature_weights(double horizon, double dt, int steps) {
    if (!(dt > 0.0) || steps < 1) throw Error("quadrature_weights: need dt > 0 and at least one step");
    if (!(horizon > 0.0)) throw Error("quadrature_weights: horizon must be positive");
    const double x = horizon / dt;
    if (x > steps * (1.0 + 1e-12)) throw Error("quadrature_weights: horizon exceeds the time-stepping range");
    QuadratureRule r;
    r.q = static_cast<int>(std::floor(x));
    r.theta = x - r.q;
    const double snap = 1e-11 * std::max(1.0, x);
    if (r.theta > 1.0 - snap) {
        ++r.q;
        r.theta = 0.0;
    } else if (r.theta < snap) {
        r.theta = 0.0;
    }
    if (r.q > steps) r.q = steps;
    if (r.q < 1) throw Error("quadrature_weights: horizon shorter than one step");
    r.weights.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    r.weights[0] = 0.5 * dt;
    for (int n = 1; n < r.q; ++n) r.weights[static_cast<std::size_t>(n)] = dt;
    r.weights[static_cast<std::size_t>(r.q)] += 0.5 * dt + dt * r.theta * (1.0 - 0.5 * r.theta);
    if (r.theta > 0.0) r.weights[static_cast<std::size_t>(r.q) + 1] = 0.5 * dt * r.theta * r.theta;
    return r;
}

/// Per-frequency filters and the coupling matrix A with a_ij = beta_d^i(w~_j).
class FilterBank {
public:
    FilterBank() = default;
    explicit FilterBank(const TimePlan& plan) : plan_(plan) {
        const int nf = plan.frequency_count();
        const std::size_t nt = static_cast<std::size_t>(plan.steps) + 1;
        for (int m = 0; m < nf; ++m) {
            const double wt = plan.omega_tilde[static_cast<std::size_t>(m)];
            const double am = alpha_shift(wt, plan.dt);
            alpha_.push_back(am);
            rules_.push_back(quadrature_weights(plan.filter_horizon[static_cast<std::size_t>(m)], plan.dt, plan.steps));
            std::vector<double> k(nt);
            for (std::size_t n = 0; n < nt; ++n)
                k[n] = rules_.back().weights[n] * (std::cos(wt * plan.time(static_cast<int>(n))) - 0.5 * am);
            kernel_.push_back(std::move(k));
            nominal_.push_back(2.0 / plan.filter_horizon[static_cast<std::size_t>(m)]);
            const double raw = raw_sum(m, wt);
            if (!(std::abs(raw) > 0.0)) throw Error("FilterBank: filter " + std::to_string(m) + " vanishes at its frequency");
            scale_.push_back(1.0 / raw);
            raw_diagonal_.push_back(nominal_.back() * raw);
        }
        coef_.resize(static_cast<std::size_t>(nf));
        for (int m = 0; m < nf; ++m) {
            coef_[static_cast<std::size_t>(m)] = kernel_[static_cast<std::size_t>(m)];
            for (double& v : coef_[static_cast<std::size_t>(m)]) v *= scale_[static_cast<std::size_t>(m)];
        }

        a_.resize(nf, nf);
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) a_(i, j) = beta(i, plan.omega_tilde[static_cast<std::size_t>(j)]);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_);
        const auto sv = svd.singularValues();
        cond_ = sv(nf - 1) > 0.0 ? sv(0) / sv(nf - 1) : std::numeric_limits<double>::infinity();
        if (!(cond_ <= 1e12))
            throw Error("FilterBank: filter matrix A is numerically singular (condition number " + std::to_string(cond_) +
                        "); the frequencies are too close for the filter horizon");
        a_inv_ = a_.partialPivLu().inverse();
    }

    const TimePlan& plan() const { return plan_; }
    int size() const { return static_cast<int>(alpha_.size()); }
    double alpha(int m) const { return alpha_.at(static_cast<std::size_t>(m)); }
    const QuadratureRule& rule(int m) const { return rules_.at(static_cast<std::size_t>(m)); }
    /// Normalizing factor c_m actually used.
    double scale(int m) const { return scale_.at(static_cast<std::size_t>(m)); }
    /// 2 / T~_{f,m}.
    double nominal_scale(int m) const { return nominal_.at(static_cast<std::size_t>(m)); }
    /// beta_d^m(w~_m) with the nominal 2/T~_{f,m} prefactor.
    double raw_diagonal(int m) const { return raw_diagonal_.at(static_cast<std::size_t>(m)); }

    const Eigen::MatrixXd& matrix() const { return a_; }
    const Eigen::MatrixXd& inverse() const { return a_inv_; }
    double condition_number() const { return cond_; }

    /// c_m s_{n,m}(cos w~_m t^n - a_m/2): the weight of W^n in p_m.
    double coefficient(int m, int n) const {
        return coef_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
    }

    /// beta_d^m(lambda)
    double beta(int m, double lambda) const { return scale(m) * raw_sum(m, lambda); }

    /// Column sums of A^{-1}.
    std::vector<double> weights() const {
        std::vector<double> w(static_cast<std::size_t>(size()), 0.0);
        for (int j = 0; j < size(); ++j)
            for (int i = 0; i < size(); ++i) w[static_cast<std::size_t>(j)] += a_inv_(i, j);
        return w;
    }

private:
    double raw_sum(int m, double lambda) const {
        const auto& k = kernel_[static_cast<std::size_t>(m)];
        double s = 0.0;
        for (std::size_t n = 0; n < k.size(); ++n)
            if (k[n] != 0.0) s += k[n] * std::cos(lambda * plan_.time(static_cast<int>(n)));
        return s;
    }

    TimePlan plan_;
    std::vector<double> alpha_, scale_, nominal_, raw_diagonal_;
    std::vector<QuadratureRule> rules_;
    std::vector<std::vector<double>> kernel_, coef_;
    Eigen::MatrixXd a_, a_inv_;
    double cond_ = 1.0;
};

inline double beta_discrete(double lambda, int m, const FilterBank& bank) { return bank.beta(m, lambda); }

/// Streams p_m += coefficient(m, n) W^n over the time levels n = 0..N_t.
class FilterAccumulator {
public:
    FilterAccumulator(const FilterBank& bank, const Grid& grid) : bank_(&bank) {
        p_.assign(static_cast<std::size_t>(bank.size()), GridFunction(grid));
    }

    void add(int n, const GridFunction& w) {
        if (n != next_)
            throw Error("FilterAccumulator: expected time level " + std::to_string(next_) + ", got " + std::to_string(n));
        if (n > bank_->plan().steps) throw Error("FilterAccumulator: time level beyond the plan");
        for (int m = 0; m < bank_->size(); ++m) {
            const double c = bank_->coefficient(m, n);
            if (c != 0.0) p_[static_cast<std::size_t>(m)].axpy(c, w);
        }
        ++next_;
    }

    int next_level() const { return next_; }
    bool complete() const { return next_ == bank_->plan().steps + 1; }
    const std::vector<GridFunction>& filtered() const { return p_; }
    std::vector<GridFunction> take() { return std::move(p_); }

    void reset() {
        for (auto& p : p_) p.fill(0.0);
        next_ = 0;
    }

private:
    const FilterBank* bank_;
    std::vector<GridFunction> p_;
    int next_ = 0;
};

/// V = A^{-1} p applied pointwise.
inline std::vector<GridFunction> filter_solve(const FilterBank& bank, const std::vector<GridFunction>& p) {
    if (static_cast<int>(p.size()) != bank.size()) throw Error("filter_solve: one field per frequency expected");
    std::vector<GridFunction> v;
    v.reserve(p.size());
    for (int i = 0; i < bank.size(); ++i) {
        GridFunction vi(p.front().grid());
        for (int j = 0; j < bank.size(); ++j) vi.axpy(bank.inverse()(i, j), p[static_cast<std::size_t>(j)]);
        v.push_back(std::move(vi));
    }
    return v;
}

} // namespace mfwh
