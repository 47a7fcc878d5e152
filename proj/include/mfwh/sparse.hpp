#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "mfwh/error.hpp"

namespace mfwh {

/// Compressed sparse row matrix with sorted column indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Builds from per-row (column -> value) maps; entries of equal column are already merged.
    CsrMatrix(std::size_t cols, const std::vector<std::map<std::size_t, double>>& rows) : cols_(cols) {
        row_ptr_.reserve(rows.size() + 1);
        row_ptr_.push_back(0);
        for (const auto& r : rows) {
            for (const auto& [c, v] : r) {
                if (c >= cols) throw Error("CsrMatrix: column index out of range");
                col_.push_back(c);
                val_.push_back(v);
            }
            row_ptr_.push_back(col_.size());
        }
    }

    std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t cols() const { return cols_; }
    std::size_t nonzeros() const { return val_.size(); }

    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::size_t> col_index() const { return col_; }
    std::span<const double> values() const { return val_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const {
        const std::size_t n = rows();
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        }
    }

    double at(std::size_t r, std::size_t c) const {
        auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
        auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
        auto it = std::lower_bound(first, last, c);
        return (it != last && *it == c) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
    }

    /// Lower and upper bandwidths: max (r - c) and max (c - r) over stored entries.
    std::pair<std::size_t, std::size_t> bandwidths() const {
        std::size_t kl = 0, ku = 0;
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
                if (col_[k] < r) kl = std::max(kl, r - col_[k]);
                else ku = std::max(ku, col_[k] - r);
            }
        return {kl, ku};
    }

    /// Infinity norm (max absolute row sum).
    double norm_inf() const {
        double m = 0.0;
        for (std::size_t r = 0; r < rows(); ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(val_[k]);
            m = std::max(m, s);
        }
        return m;
    }

    /// Entrywise symmetry to a tolerance relative to the largest entry.
    bool is_symmetric(double rel_tol = 1e-13) const {
        if (rows() != cols_) return false;
        double scale = 0.0;
        for (double v : val_) scale = std::max(scale, std::abs(v));
        for (std::size_t r = 0; r < rows(); ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                if (std::abs(val_[k] - at(col_[k], r)) > rel_tol * scale) return false;
        return true;
    }

    /// Returns alpha * I + beta * A (A square).
    CsrMatrix shifted(double alpha, double beta) const {
        std::vector<std::map<std::size_t, double>> r(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) r[i][col_[k]] += beta * val_[k];
            r[i][i] += alpha;
        }
        return CsrMatrix(cols_, r);
    }

private:
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> val_;
};

} // namespace mfwh
