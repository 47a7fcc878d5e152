#pragma once

/// @file banded_lu.hpp
/// @brief Banded LU factorization with partial pivoting (LAPACK gbtrf-style storage).
///
/// Column-major band storage with leading dimension 2*kl + ku + 1: entry (i, j) of the
/// factored matrix lives at ab[j*ld + kl + ku + i - j]. The extra kl rows above hold
/// the fill produced by row interchanges, so U has upper bandwidth kl + ku.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <tuple>
#include <span>
#include <vector>

#include "mfwh/error.hpp"
#include "mfwh/sparse.hpp"

namespace mfwh {

class BandedLU {
public:
    BandedLU() = default;

    explicit BandedLU(const CsrMatrix& a) { factor(a); }

    void factor(const CsrMatrix& a) {
        if (a.rows() != a.cols()) throw Error("BandedLU: matrix is not square");
        n_ = a.rows();
        std::tie(kl_, ku_) = a.bandwidths();
        ld_ = 2 * kl_ + ku_ + 1;
        ab_.assign(ld_ * n_, 0.0);
        piv_.assign(n_, 0);
        norm_ = a.norm_inf();

        const auto rp = a.row_ptr();
        const auto ci = a.col_index();
        const auto v = a.values();
        for (std::size_t r = 0; r < n_; ++r)
            for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) at(r, ci[k]) = v[k];

        min_pivot_ = n_ ? std::numeric_limits<double>::infinity() : 0.0;
        const std::size_t kv = kl_ + ku_;  // upper bandwidth of U
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t last = std::min(n_ - 1, j + kl_);
            std::size_t p = j;
            double pmax = std::abs(at(j, j));
            for (std::size_t i = j + 1; i <= last; ++i)
                if (std::abs(at(i, j)) > pmax) {
                    pmax = std::abs(at(i, j));
                    p = i;
                }
            piv_[j] = p;
            min_pivot_ = std::min(min_pivot_, pmax);
            if (pmax == 0.0) {
                singular_ = true;
                continue;
            }
            const std::size_t cend = std::min(n_ - 1, j + kv);
            if (p != j)
                for (std::size_t c = j; c <= cend; ++c) std::swap(at(j, c), at(p, c));
            const double inv = 1.0 / at(j, j);
            for (std::size_t i = j + 1; i <= last; ++i) at(i, j) *= inv;
            const double* l = &at(j, j) + 1;  // contiguous column below the pivot
            const std::size_t m = last - j;
            for (std::size_t c = j + 1; c <= cend; ++c) {
                const double ujc = at(j, c);
                if (ujc == 0.0) continue;
                double* col = &at(j, c) + 1;
                for (std::size_t i = 0; i < m; ++i) col[i] -= l[i] * ujc;
            }
        }
    }

    std::size_t size() const { return n_; }
    std::size_t lower_bandwidth() const { return kl_; }
    std::size_t upper_bandwidth() const { return ku_; }
    bool singular() const { return singular_; }

    /// Smallest pivot magnitude relative to the infinity norm of the input matrix.
    double min_pivot_ratio() const { return norm_ > 0 ? min_pivot_ / norm_ : 0.0; }

    /// Solves A x = b in place.
    void solve(std::span<double> x) const {
        if (singular_) throw Error("BandedLU: matrix is singular");
        if (x.size() != n_) throw Error("BandedLU: right-hand side has the wrong size");
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t p = piv_[j];
            if (p != j) std::swap(x[j], x[p]);
            const double xj = x[j];
            if (xj == 0.0) continue;
            const std::size_t last = std::min(n_ - 1, j + kl_);
            const double* l = &at(j, j) + 1;
            for (std::size_t i = j + 1; i <= last; ++i) x[i] -= l[i - j - 1] * xj;
        }
        const std::size_t kv = kl_ + ku_;
        for (std::size_t jj = n_; jj-- > 0;) {
            x[jj] /= at(jj, jj);
            const double xj = x[jj];
            if (xj == 0.0) continue;
            const std::size_t first = jj > kv ? jj - kv : 0;
            for (std::size_t i = first; i < jj; ++i) x[i] -= at(i, jj) * xj;
        }
    }

private:
    double& at(std::size_t i, std::size_t j) { return ab_[j * ld_ + kl_ + ku_ + i - j]; }
    const double& at(std::size_t i, std::size_t j) const { return ab_[j * ld_ + kl_ + ku_ + i - j]; }

    std::size_t n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
    std::vector<double> ab_;
    std::vector<std::size_t> piv_;
    double norm_ = 0.0;
    double min_pivot_ = 0.0;
    bool singular_ = false;
};

} // namespace mfwh
