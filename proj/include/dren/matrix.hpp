#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dren/error.hpp"

namespace dren {

/// Dense row-major matrix of IEEE doubles. All library maths runs in double
/// precision; reductions are evaluated sequentially left-to-right so results
/// are bitwise reproducible.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), data_(std::move(values)) {
        if (data_.size() != rows_ * cols_) {
            throw InvalidInputError("Matrix: data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) {
        throw InvalidInputError(std::string(what) + ": non-finite entries in input");
    }
}

/// Squared Euclidean distances between all row pairs of `m`.
/// Uses the expansion ||a||^2 + ||b||^2 - 2 a.b; negative round-off on
/// near-duplicate rows is clamped to 0. Output is symmetric with a zero
/// diagonal.
inline Matrix pairwise_sq_dists(const Matrix& m) {
    if (m.rows() < 2) {
        throw InvalidInputError("pairwise_sq_dists: need at least 2 rows");
    }
    require_finite(m, "pairwise_sq_dists");

    const std::size_t n = m.rows();
    const std::size_t k = m.cols();

    std::vector<double> sq_norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = m.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) s += ri[c] * ri[c];
        sq_norm[i] = s;
    }

    Matrix out(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ri = m.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* rj = m.row(j);
            double dot = 0.0;
            for (std::size_t c = 0; c < k; ++c) dot += ri[c] * rj[c];
            double d2 = sq_norm[i] + sq_norm[j] - 2.0 * dot;
            if (d2 < 0.0) d2 = 0.0;
            out(i, j) = d2;
            out(j, i) = d2;
        }
    }
    return out;
}

/// Row-wise softmax with row-max subtraction. Each output row is nonnegative
/// and sums to 1 (within 1e-12) for any finite input.
inline Matrix stable_softmax_rows(const Matrix& m) {
    require_finite(m, "stable_softmax_rows");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* src = m.row(i);
        double* dst = out.row(i);
        double mx = src[0];
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, src[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            dst[j] = std::exp(src[j] - mx);
            sum += dst[j];
        }
        for (std::size_t j = 0; j < m.cols(); ++j) dst[j] /= sum;
    }
    return out;
}

// --- small dense helpers shared by the encoder / baseline code ---

/// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InvalidInputError("matmul: inner dimensions disagree");
    }
    Matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ra = a.row(i);
        double* rc = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = ra[k];
            const double* rb = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) rc[j] += aik * rb[j];
        }
    }
    return c;
}

/// C = A^T * B
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw InvalidInputError("matmul_at_b: row counts disagree");
    }
    Matrix c(a.cols(), b.cols(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ra = a.row(k);
        const double* rb = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double* rc = c.row(i);
            const double aki = ra[i];
            for (std::size_t j = 0; j < b.cols(); ++j) rc[j] += aki * rb[j];
        }
    }
    return c;
}

/// C = A * B^T
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw InvalidInputError("matmul_a_bt: column counts disagree");
    }
    Matrix c(a.rows(), b.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ra = a.row(i);
        double* rc = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* rb = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ra[k] * rb[k];
            rc[j] = s;
        }
    }
    return c;
}

/// 1 x cols matrix of column sums.
inline Matrix col_sums(const Matrix& a) {
    Matrix c(1, a.cols(), 0.0);
    double* rc = c.row(0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ra = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) rc[j] += ra[j];
    }
    return c;
}

inline double sum_all(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    return s;
}

} // namespace dren
