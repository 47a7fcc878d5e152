#pragma once

/// @file analysis.hpp
/// @brief Convergence theory for the multi-frequency iteration: filter weights,
/// mu(lambda) = sum_m w_m beta_m(lambda), the brute-force eigenvalue check of
/// A^{-1} B(lambda), discrete spectra and the asymptotic convergence rate predictor.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfwh/error.hpp"
#include "mfwh/grid.hpp"
#include "mfwh/stencil.hpp"
#include "mfwh/time_filter.hpp"
#include "mfwh/time_plan.hpp"

namespace mfwh {

/// Column sums of A^{-1}.
inline std::vector<double> filter_weights(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw Error("filter_weights: A must be square and non-empty");
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw Error("filter_weights: A is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    std::vector<double> w(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) w[static_cast<std::size_t>(j)] = inv.col(j).sum();
    return w;
}

enum class MuMode { continuous, discrete };

/// mu(lambda) for either the continuous filters (closed-form sincs) or the discrete
/// filters of a FilterBank.
class MuFunction {
public:
    /// Continuous filters with horizons T_m and shifts alpha_m.
    static MuFunction continuous(std::span<const double> omegas, std::span<const double> horizons,
                                 std::span<const double> alphas) {
        if (omegas.size() != horizons.size() || omegas.size() != alphas.size() || omegas.empty())
            throw Error("MuFunction: one horizon and one shift per frequency expected");
        MuFunction f;
        f.mode_ = MuMode::continuous;
        f.omega_.assign(omegas.begin(), omegas.end());
        f.horizon_.assign(horizons.begin(), horizons.end());
        f.alpha_.assign(alphas.begin(), alphas.end());
        f.finish();
        return f;
    }

    /// Continuous filters over whole periods: T_1 = N_p 2pi/w_1 and T_m the largest whole
    /// number of periods of w_m that fits in T_1.
    static MuFunction continuous(std::span<const double> omegas, int periods, double alpha = 0.5) {
        if (omegas.empty() || periods < 1) throw Error("MuFunction: need frequencies and N_p >= 1");
        const double two_pi = 2.0 * std::numbers::pi;
        const double t1 = periods * two_pi / omegas.front();
        std::vector<double> horizons, alphas(omegas.size(), alpha);
        for (double w : omegas) {
            const int n = static_cast<int>(std::floor(t1 * w / two_pi * (1.0 + 1e-12)));
            if (n < 1) throw Error("MuFunction: frequency below the first");
            horizons.push_back(std::min(t1, n * two_pi / w));
        }
        return continuous(omegas, horizons, alphas);
    }

    static MuFunction discrete(const FilterBank& bank) {
        MuFunction f;
        f.mode_ = MuMode::discrete;
        f.bank_ = bank;
        f.omega_ = bank.plan().omega_tilde;
        for (int m = 0; m < bank.size(); ++m) f.alpha_.push_back(bank.alpha(m));
        f.horizon_ = bank.plan().filter_horizon;
        f.finish();
        return f;
    }

    MuMode mode() const { return mode_; }
    int size() const { return static_cast<int>(omega_.size()); }
    /// Filter centres: pristine frequencies (continuous) or modified frequencies (discrete).
    const std::vector<double>& frequencies() const { return omega_; }
    const std::vector<double>& weights() const { return w_; }
    const Eigen::MatrixXd& matrix() const { return a_; }
    const std::optional<FilterBank>& bank() const { return bank_; }

    double beta(int m, double lambda) const {
        const auto k = static_cast<std::size_t>(m);
        if (mode_ == MuMode::discrete) return bank_->beta(m, lambda);
        return beta_continuous(lambda, omega_[k], horizon_[k], alpha_[k]);
    }

    double operator()(double lambda) const {
        double s = 0.0;
        for (int m = 0; m < size(); ++m) s += w_[static_cast<std::size_t>(m)] * beta(m, lambda);
        return s;
    }

private:
    void finish() {
        const int nf = size();
        a_.resize(nf, nf);
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) a_(i, j) = beta(i, omega_[static_cast<std::size_t>(j)]);
        w_ = filter_weights(a_);
    }

    MuMode mode_ = MuMode::continuous;
    std::vector<double> omega_, horizon_, alpha_, w_;
    std::optional<FilterBank> bank_;
    Eigen::MatrixXd a_;
};

inline double mu(double lambda, const MuFunction& f) { return f(lambda); }

struct EquivalenceCheck {
    double mu_matrix = 0.0;    // dominant eigenvalue of A^{-1} B(lambda)
    double mu_formula = 0.0;   // sum_m w_m beta_m(lambda)
    double max_other = 0.0;    // largest |eigenvalue| among the remaining N_f - 1
    double max_imag = 0.0;     // largest |imaginary part|
    std::vector<std::complex<double>> eigenvalues;
};

/// Forms M = A^{-1} B(lambda) with B_ij = beta_i(lambda) and eigendecomposes it densely.
inline EquivalenceCheck eigenvalue_equivalence_check(const MuFunction& f, double lambda) {
    const int nf = f.size();
    Eigen::MatrixXd b(nf, nf);
    for (int i = 0; i < nf; ++i) b.row(i).setConstant(f.beta(i, lambda));
    const Eigen::MatrixXd m = f.matrix().fullPivLu().solve(b);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    EquivalenceCheck r;
    r.mu_formula = f(lambda);
    for (Eigen::Index k = 0; k < nf; ++k) r.eigenvalues.push_back(es.eigenvalues()(k));
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
              [](auto x, auto y) { return std::abs(x) > std::abs(y); });
    r.mu_matrix = r.eigenvalues.front().real();
    for (const auto& e : r.eigenvalues) r.max_imag = std::max(r.max_imag, std::abs(e.imag()));
    for (std::size_t k = 1; k < r.eigenvalues.size(); ++k) r.max_other = std::max(r.max_other, std::abs(r.eigenvalues[k]));
    return r;
}

/// Adjusted eigenvalue; the same map as modified_frequency.
inline double lambda_tilde(double lambda, double dt, double alpha, double beta) {
    return modified_frequency(lambda, dt, alpha, beta);
}

inline double lambda_tilde(double lambda, const TimePlan& plan) {
    return lambda_tilde(lambda, plan.dt, plan.alpha, plan.beta);
}

/// Discrete eigenvalues of L_h Phi = -lambda^2 Phi with homogeneous boundary conditions.
struct SpectrumInfo {
    std::vector<double> lambda;          // sorted ascending, >= 0
    std::vector<double> lambda_squared;  // same order
    std::vector<std::array<int, 2>> modes;  // 1D mode index per axis for each entry
    // Real 1D eigenvectors (columns) per axis, present when requested.
    std::array<Eigen::MatrixXd, 2> axis_vectors;
    bool has_vectors = false;
    std::size_t unknowns_x = 0, unknowns_y = 1;

    std::size_t size() const { return lambda.size(); }

    /// 2D eigenvector over the unknown layout (x fastest).
    std::vector<double> eigenvector(std::size_t nu) const {
        if (!has_vectors) throw Error("SpectrumInfo: eigenvectors were not computed");
        const auto [kx, ky] = modes.at(nu);
        std::vector<double> v(unknowns_x * unknowns_y);
        for (std::size_t j = 0; j < unknowns_y; ++j) {
            const double fy = axis_vectors[1].size() ? axis_vectors[1](static_cast<Eigen::Index>(j), ky) : 1.0;
            for (std::size_t i = 0; i < unknowns_x; ++i)
                v[j * unknowns_x + i] = axis_vectors[0](static_cast<Eigen::Index>(i), kx) * fy;
        }
        return v;
    }
};

namespace detail {

struct AxisSpectrum {
    std::vector<double> lambda_squared;
    Eigen::MatrixXd vectors;
};

inline AxisSpectrum axis_spectrum(const Grid& grid, int l, int order, BcKind lower, BcKind upper, double c,
                                  bool vectors) {
    std::size_t m = 0;
    const auto dense = axis_operator_dense(grid, l, order, lower, upper, &m);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c * c * dense[i * m + j];

    AxisSpectrum s;
    const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
    if ((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, vectors ? Eigen::ComputeEigenvectors
                                                                          : Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) s.lambda_squared.push_back(-es.eigenvalues()(k));
        if (vectors) s.vectors = es.eigenvectors();
    } else {
        const Eigen::EigenSolver<Eigen::MatrixXd> es(a, vectors);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const auto e = es.eigenvalues()(k);
            if (std::abs(e.imag()) > 1e-8 * std::max(1.0, scale))
                throw Error("discrete_spectrum: operator along axis " + std::to_string(l) +
                            " has a non-real eigenvalue (imaginary part " + std::to_string(e.imag()) + ")");
            s.lambda_squared.push_back(-e.real());
        }
        if (vectors) {
            s.vectors = es.eigenvectors().real();
            for (Eigen::Index k = 0; k < s.vectors.cols(); ++k) s.vectors.col(k).normalize();
        }
    }
    return s;
}

} // namespace detail

inline SpectrumInfo discrete_spectrum(const Grid& grid, int order, const BoundaryCondition& bc, bool vectors = false,
                                      double c = 1.0) {
    for (int l = 0; l < grid.dim(); ++l)
        if (grid.cells(l) > 4096) throw Error("discrete_spectrum: more than 4096 cells along an axis");
    const auto sx = detail::axis_spectrum(grid, 0, order, bc.lower(0), bc.upper(0), c, vectors);
    detail::AxisSpectrum sy;
    if (grid.dim() == 2) sy = detail::axis_spectrum(grid, 1, order, bc.lower(1), bc.upper(1), c, vectors);
    else sy.lambda_squared = {0.0};

    struct Entry {
        double l2;
        int kx, ky;
    };
    std::vector<Entry> all;
    all.reserve(sx.lambda_squared.size() * sy.lambda_squared.size());
    for (std::size_t ky = 0; ky < sy.lambda_squared.size(); ++ky)
        for (std::size_t kx = 0; kx < sx.lambda_squared.size(); ++kx)
            all.push_back({sx.lambda_squared[kx] + sy.lambda_squared[ky], static_cast<int>(kx), static_cast<int>(ky)});
    std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.l2 < b.l2; });

    SpectrumInfo s;
    for (const auto& e : all) {
        s.lambda_squared.push_back(e.l2);
        s.lambda.push_back(std::sqrt(std::max(0.0, e.l2)));
        s.modes.push_back({e.kx, e.ky});
    }
    s.unknowns_x = sx.lambda_squared.size();
    s.unknowns_y = grid.dim() == 2 ? sy.lambda_squared.size() : 1;
    if (vectors) {
        s.has_vectors = true;
        s.axis_vectors[0] = sx.vectors;
        if (grid.dim() == 2) s.axis_vectors[1] = sy.vectors;
    }
    return s;
}

struct AcrPrediction {
    double acr = 0.0;
    std::size_t argmax = 0;          // index into the spectrum
    double argmax_lambda = 0.0;      // lambda_h at the maximum
    double argmax_lambda_tilde = 0.0;
    std::vector<double> lambda_tilde;  // per spectrum entry
    std::vector<double> mu_d;          // per spectrum entry
    std::vector<std::string> warnings;
};

/// ACR = max_nu |mu_d(lambda~_nu)| over the discrete spectrum.
inline AcrPrediction predict_acr(const TimePlan& plan, const FilterBank& bank, const SpectrumInfo& spectrum) {
    const MuFunction f = MuFunction::discrete(bank);
    AcrPrediction p;
    p.lambda_tilde.resize(spectrum.size());
    p.mu_d.resize(spectrum.size());
    std::size_t near_one = 0;
    double closest = 0.0, closest_lambda = 0.0;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(spectrum.size()); ++k) {
        const double lt = lambda_tilde(spectrum.lambda[static_cast<std::size_t>(k)], plan);
        p.lambda_tilde[static_cast<std::size_t>(k)] = lt;
        p.mu_d[static_cast<std::size_t>(k)] = f(lt);
    }
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double a = std::abs(p.mu_d[k]);
        if (a > p.acr) {
            p.acr = a;
            p.argmax = k;
        }
        bool in_lobe = false;
        for (std::size_t m = 0; m < plan.omega_tilde.size(); ++m)
            if (std::abs(p.lambda_tilde[k] - plan.omega_tilde[m]) < std::numbers::pi / plan.filter_horizon[m])
                in_lobe = true;
        const double gap = std::abs(1.0 - p.mu_d[k]);
        if (!in_lobe && gap < 1e-3) {
            if (near_one == 0 || gap < closest) {
                closest = gap;
                closest_lambda = spectrum.lambda[k];
            }
            ++near_one;
        }
    }
    if (spectrum.size()) {
        p.argmax_lambda = spectrum.lambda[p.argmax];
        p.argmax_lambda_tilde = p.lambda_tilde[p.argmax];
    }
    if (near_one)
        p.warnings.push_back("possible spurious resonance (heuristic threshold |1 - mu_d| < 1e-3): " +
                             std::to_string(near_one) + " eigenvalue(s) away from every frequency, closest at lambda_h = " +
                             std::to_string(closest_lambda));
    if (p.acr >= 1.0)
        p.warnings.push_back("ACR = " + std::to_string(p.acr) + " >= 1: the fixed-point iteration will not converge");
    return p;
}

struct MuSample {
    double lambda = 0.0;
    double mu = 0.0;
};

/// count uniform samples of f on [lo, hi]; f is any callable double -> double.
template <class F>
std::vector<MuSample> sample_curve(double lo, double hi, int count, F&& f) {
    if (count < 2) throw Error("sample_mu_curve: need at least two samples");
    if (!(hi > lo)) throw Error("sample_mu_curve: empty range");
    std::vector<MuSample> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
    for (int k = 0; k < count; ++k) {
        const double l = lo + (hi - lo) * k / (count - 1);
        out[static_cast<std::size_t>(k)] = {l, f(l)};
    }
    return out;
}

/// Samples mu_d(lambda~(lambda)) against physical lambda.
inline std::vector<MuSample> sample_mu_curve(double lo, double hi, int count, const TimePlan& plan,
                                             const FilterBank& bank) {
    const MuFunction f = MuFunction::discrete(bank);
    return sample_curve(lo, hi, count, [&](double l) { return f(lambda_tilde(l, plan)); });
}

/// Samples a (continuous or discrete) mu directly.
inline std::vector<MuSample> sample_mu_curve(double lo, double hi, int count, const MuFunction& f) {
    return sample_curve(lo, hi, count, [&](double l) { return f(l); });
}

/// Lambda-measure of {|mu| > 1} estimated from uniform samples.
inline double exceedance_measure(const std::vector<MuSample>& s) {
    if (s.size() < 2) return 0.0;
    const double h = (s.back().lambda - s.front().lambda) / static_cast<double>(s.size() - 1);
    std::size_t n = 0;
    for (const auto& x : s)
        if (std::abs(x.mu) > 1.0) ++n;
    return h * static_cast<double>(n);
}

} // namespace mfwh
