#pragma once

/// @file krylov.hpp
/// @brief Matrix-free conjugate gradient and restarted GMRES.
///
/// Operators are callables `op(std::span<const double> in, std::span<double> out)`.
/// Residuals are reported relative to |b|_2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mfwh/error.hpp"

namespace mfwh {

struct KrylovOptions {
    double tolerance = 1e-12;
    int max_iterations = 1000;
    int restart = 200;  // GMRES only
};

struct KrylovResult {
    int iterations = 0;
    double residual = 0.0;  // final relative residual
    bool converged = false;
    std::vector<double> history;  // relative residual after each iteration
    int applications = 0;         // operator applications
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_zero(std::span<const double> a) {
    for (double v : a)
        if (v != 0.0) return false;
    return true;
}

} // namespace detail

/// Conjugate gradient for symmetric positive definite operators. x holds the initial
/// guess on entry and the solution on exit.
template <class Op>
KrylovResult conjugate_gradient(Op&& op, std::span<const double> b, std::span<double> x,
                                const KrylovOptions& opt = {}) {
    const std::size_t n = b.size();
    if (x.size() != n) throw Error("conjugate_gradient: size mismatch");
    KrylovResult res;
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        for (auto& v : x) v = 0.0;
        res.converged = true;
        return res;
    }

    std::vector<double> r(b.begin(), b.end()), p(n), ap(n);
    if (!detail::all_zero(x)) {
        op(std::span<const double>(x.data(), n), std::span<double>(ap));
        ++res.applications;
        for (std::size_t k = 0; k < n; ++k) r[k] -= ap[k];
    }
    p = r;
    double rr = detail::dot(r, r);
    res.residual = std::sqrt(rr) / bnorm;
    if (res.residual <= opt.tolerance) {
        res.converged = true;
        return res;
    }

    for (int it = 1; it <= opt.max_iterations; ++it) {
        op(std::span<const double>(p), std::span<double>(ap));
        ++res.applications;
        const double pap = detail::dot(p, ap);
        if (!(pap > 0.0)) throw SolverError("conjugate_gradient: operator is not positive definite", it, res.residual);
        const double a = rr / pap;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        const double rr_new = detail::dot(r, r);
        res.iterations = it;
        res.residual = std::sqrt(rr_new) / bnorm;
        res.history.push_back(res.residual);
        if (res.residual <= opt.tolerance) {
            res.converged = true;
            return res;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
    }
    return res;
}

/// Restarted GMRES(m) with modified Gram-Schmidt and one reorthogonalization pass.
/// x holds the initial guess on entry and the solution on exit.
template <class Op>
KrylovResult gmres(Op&& op, std::span<const double> b, std::span<double> x, const KrylovOptions& opt = {}) {
    const std::size_t n = b.size();
    if (x.size() != n) throw Error("gmres: size mismatch");
    if (opt.restart < 1) throw Error("gmres: restart must be positive");
    KrylovResult res;
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        for (auto& v : x) v = 0.0;
        res.converged = true;
        return res;
    }

    const int m = opt.restart;
    std::vector<std::vector<double>> basis;
    std::vector<double> h(static_cast<std::size_t>((m + 1) * m));
    auto H = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(j * (m + 1) + i)]; };
    std::vector<double> cs(m), sn(m), g(m + 1), y(m), w(n), r(n);

    int total = 0;
    while (total < opt.max_iterations) {
        // r = b - A x
        if (detail::all_zero(x)) {
            std::copy(b.begin(), b.end(), r.begin());
        } else {
            op(std::span<const double>(x.data(), n), std::span<double>(w));
            ++res.applications;
            for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - w[k];
        }
        const double beta = detail::norm2(r);
        res.residual = beta / bnorm;
        if (res.residual <= opt.tolerance) {
            res.converged = true;
            return res;
        }

        basis.assign(1, std::vector<double>(n));
        for (std::size_t k = 0; k < n; ++k) basis[0][k] = r[k] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int j = 0;
        bool done = false;
        for (; j < m && total < opt.max_iterations; ++j) {
            op(std::span<const double>(basis[j]), std::span<double>(w));
            ++res.applications;
            ++total;
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const double c = detail::dot(w, basis[i]);
                    if (pass == 0) H(i, j) = c;
                    else H(i, j) += c;
                    for (std::size_t k = 0; k < n; ++k) w[k] -= c * basis[i][k];
                }
            }
            const double hn = detail::norm2(w);
            H(j + 1, j) = hn;

            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
                H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
                H(i, j) = t;
            }
            const double den = std::hypot(H(j, j), H(j + 1, j));
            if (den == 0.0) throw SolverError("gmres: breakdown with singular Hessenberg matrix", total, res.residual);
            cs[j] = H(j, j) / den;
            sn[j] = H(j + 1, j) / den;
            H(j, j) = den;
            H(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            res.residual = std::abs(g[j + 1]) / bnorm;
            res.history.push_back(res.residual);
            res.iterations = total;
            if (res.residual <= opt.tolerance || hn == 0.0) {
                ++j;
                done = true;
                break;
            }
            basis.emplace_back(n);
            for (std::size_t k = 0; k < n; ++k) basis[j + 1][k] = w[k] / hn;
        }

        // Back substitution and update x += V y.
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
            y[i] = s / H(i, i);
        }
        for (int i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * basis[i][k];

        if (done) {
            res.converged = res.residual <= opt.tolerance;
            if (res.converged) return res;
        }
    }
    return res;
}

} // namespace mfwh
