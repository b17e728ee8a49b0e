#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dren/error.hpp"
#include "dren/matrix.hpp"

namespace dren {

/// Joint probability distribution over ordered sample pairs: zero diagonal,
/// nonnegative entries, total mass 1 (within 1e-10) and symmetric (within
/// 1e-12). Both the high-dimensional P and the low-dimensional Q live here.
class AffinityMatrix {
public:
    static constexpr double kSumTolerance = 1e-10;
    static constexpr double kSymmetryTolerance = 1e-12;

    /// Validates all invariants; throws InvalidInputError on violation.
    static AffinityMatrix from_probs(Matrix probs) {
        if (probs.rows() != probs.cols()) {
            throw InvalidInputError("AffinityMatrix: matrix must be square");
        }
        const std::size_t n = probs.rows();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (probs(i, i) != 0.0) {
                throw InvalidInputError("AffinityMatrix: diagonal must be zero");
            }
            for (std::size_t j = 0; j < n; ++j) {
                const double v = probs(i, j);
                if (!(v >= 0.0)) {
                    throw InvalidInputError("AffinityMatrix: negative or NaN entry");
                }
                if (std::fabs(v - probs(j, i)) > kSymmetryTolerance) {
                    throw InvalidInputError("AffinityMatrix: asymmetry beyond tolerance");
                }
                total += v;
            }
        }
        if (std::fabs(total - 1.0) > kSumTolerance) {
            throw InvalidInputError("AffinityMatrix: total mass " + std::to_string(total) +
                                    " not within 1e-10 of 1");
        }
        return AffinityMatrix(std::move(probs));
    }

    std::size_t n() const { return probs_.rows(); }
    const Matrix& probs() const { return probs_; }
    double operator()(std::size_t i, std::size_t j) const { return probs_(i, j); }

private:
    explicit AffinityMatrix(Matrix probs) : probs_(std::move(probs)) {}
    Matrix probs_;
};

/// Per-row Gaussian bandwidth search settings and results. `sigma` and
/// `converged` are filled by conditional_p, one entry per row. A row that
/// fails to converge keeps its last bandwidth and is flagged rather than
/// aborting the run.
struct PerplexityCalibration {
    double target_perplexity = 15.0;
    int max_iterations = 64;
    // Stop once |2^H - target| falls below this; tighter than the matching
    // bits criterion for any target above ~1.44.
    double entropy_tolerance = 1e-5;
    double sigma_min = 1e-20;
    double sigma_max = 1e20;

    std::vector<double> sigma;
    std::vector<std::uint8_t> converged;

    std::size_t unconverged_rows() const {
        std::size_t c = 0;
        for (auto f : converged) c += (f == 0);
        return c;
    }
};

namespace detail {

// Row conditionals p_{j|i} for one bandwidth, plus the row entropy in bits.
// The smallest off-diagonal distance is shifted out of the exponent so the
// largest kernel weight is exactly 1; the shift cancels in the normalization.
inline double fill_row_conditionals(const Matrix& dists_sq, std::size_t i, double sigma,
                                    double* out_row) {
    const std::size_t n = dists_sq.rows();
    const double beta = 1.0 / (2.0 * sigma * sigma);

    double d2_min = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d2 = dists_sq(i, j);
        if (first || d2 < d2_min) {
            d2_min = d2;
            first = false;
        }
    }

    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            out_row[j] = 0.0;
            continue;
        }
        const double w = std::exp(-(dists_sq(i, j) - d2_min) * beta);
        out_row[j] = w;
        sum += w;
    }

    double entropy_bits = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double p = out_row[j] / sum;
        out_row[j] = p;
        if (p > 0.0) {
            entropy_bits -= p * std::log2(p < 1e-12 ? 1e-12 : p);
        }
    }
    return entropy_bits;
}

} // namespace detail

/// Row-stochastic conditionals p_{j|i} = exp(-d2_ij / 2 sigma_i^2) / sum,
/// with sigma_i found per row by bisection (in log space) on the row entropy
/// so that the row perplexity 2^H matches the calibration target. Entropy is
/// nondecreasing in sigma, which is what makes bisection valid.
inline Matrix conditional_p(const Matrix& dists_sq, PerplexityCalibration& calib) {
    const std::size_t n = dists_sq.rows();
    if (dists_sq.rows() != dists_sq.cols()) {
        throw InvalidInputError("conditional_p: distance matrix must be square");
    }
    if (n < 3) {
        throw InvalidConfigError("conditional_p: need at least 3 samples");
    }
    if (!(calib.target_perplexity > 0.0) || calib.target_perplexity >= static_cast<double>(n)) {
        throw InvalidConfigError("conditional_p: target perplexity must be in (0, N)");
    }
    require_finite(dists_sq, "conditional_p");

    const double target = calib.target_perplexity;
    Matrix cond(n, n, 0.0);
    calib.sigma.assign(n, 0.0);
    calib.converged.assign(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        double lo = calib.sigma_min;
        double hi = calib.sigma_max;
        double sigma = 1.0;
        bool ok = false;
        for (int it = 0; it < calib.max_iterations; ++it) {
            sigma = std::sqrt(lo * hi);
            const double h_bits = detail::fill_row_conditionals(dists_sq, i, sigma, cond.row(i));
            const double perp = std::exp2(h_bits);
            if (std::fabs(perp - target) <= calib.entropy_tolerance) {
                ok = true;
                break;
            }
            if (perp < target) {
                lo = sigma; // entropy too low, widen the kernel
            } else {
                hi = sigma;
            }
        }
        if (!ok) {
            // keep the conditionals from the last sigma probed
            detail::fill_row_conditionals(dists_sq, i, sigma, cond.row(i));
        }
        calib.sigma[i] = sigma;
        calib.converged[i] = ok ? 1 : 0;
    }
    return cond;
}

inline Matrix conditional_p(const Matrix& dists_sq, double target_perplexity) {
    PerplexityCalibration calib;
    calib.target_perplexity = target_perplexity;
    return conditional_p(dists_sq, calib);
}

/// Joint P from row conditionals: p_ij = (p_{j|i} + p_{i|j}) / 2N.
inline AffinityMatrix symmetrize_p(const Matrix& cond) {
    if (cond.rows() != cond.cols()) {
        throw InvalidInputError("symmetrize_p: conditionals must be square");
    }
    const std::size_t n = cond.rows();
    Matrix joint(n, n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (cond(i, j) + cond(j, i)) * scale;
            joint(i, j) = v;
            joint(j, i) = v;
        }
    }
    return AffinityMatrix::from_probs(std::move(joint));
}

/// Joint Q from embedding coordinates under the Student-t kernel with one
/// degree of freedom: q_ij = (1 + ||z_i - z_j||^2)^-1 / normalizer.
inline AffinityMatrix student_t_q(const Matrix& z) {
    if (z.rows() < 2) {
        throw InvalidInputError("student_t_q: need at least 2 embeddings");
    }
    const Matrix d2 = pairwise_sq_dists(z);
    const std::size_t n = z.rows();
    Matrix q(n, n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = 1.0 / (1.0 + d2(i, j));
            q(i, j) = w;
            q(j, i) = w;
            total += 2.0 * w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) q(i, j) /= total;
        }
    }
    return AffinityMatrix::from_probs(std::move(q));
}

} // namespace dren
