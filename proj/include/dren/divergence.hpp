#pragma once

#include <cmath>
#include <string>

#include "dren/affinity.hpp"
#include "dren/error.hpp"
#include "dren/matrix.hpp"

namespace dren {

/// Probability floor applied to Q entries wherever they enter a log or a
/// negative power. Applied at evaluation time only; stored affinities keep
/// their exact sums.
inline constexpr double kProbFloor = 1e-12;

/// Selects the divergence used for the embedding term of the objective.
/// Wasserstein-1 is taken under the discrete 0/1 ground metric over pair
/// indices, which makes it exactly the total variation distance (and gives a
/// closed form that is differentiable almost everywhere).
struct DivergenceKind {
    enum class Tag { KL, Renyi, Wasserstein1TV };

    Tag tag = Tag::KL;
    double alpha = 0.5; // Renyi order, must be in (0,1) or (1,inf)

    static DivergenceKind kl() { return {Tag::KL, 0.5}; }
    static DivergenceKind renyi(double a = 0.5) {
        if (a == 1.0 || a <= 0.0) {
            throw InvalidConfigError("DivergenceKind: Renyi order must be in (0,1) or (1,inf)");
        }
        return {Tag::Renyi, a};
    }
    static DivergenceKind wasserstein1_tv() { return {Tag::Wasserstein1TV, 0.5}; }

    const char* name() const {
        switch (tag) {
            case Tag::KL: return "kl";
            case Tag::Renyi: return "renyi";
            case Tag::Wasserstein1TV: return "w1";
        }
        return "?";
    }
};

namespace detail {

// Raw-matrix implementations. These exist separately so the classical t-SNE
// loop can evaluate them with an exaggerated P that is deliberately not a
// probability distribution.

inline void check_same_square(const Matrix& p, const Matrix& q, const char* what) {
    if (p.rows() != p.cols() || q.rows() != q.cols() || p.rows() != q.rows()) {
        throw InvalidInputError(std::string(what) + ": dimension mismatch");
    }
}

inline double kl_value_raw(const Matrix& p, const Matrix& q) {
    check_same_square(p, q, "kl_divergence");
    double acc = 0.0;
    const std::size_t n = p.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double pij = p(i, j);
            if (pij == 0.0) continue;
            const double qij = q(i, j) < kProbFloor ? kProbFloor : q(i, j);
            acc += pij * std::log(pij / qij);
        }
    }
    return acc;
}

// Gradient of KL(P, Q(Z)) with respect to Z, chained through the Student-t
// kernel: dKL/dz_i = 4 sum_j (p_ij - q_ij) (z_i - z_j) / (1 + ||z_i - z_j||^2).
inline Matrix kl_grad_raw(const Matrix& p, const Matrix& q, const Matrix& z) {
    check_same_square(p, q, "kl_grad_wrt_z");
    if (p.rows() != z.rows()) {
        throw InvalidInputError("kl_grad_wrt_z: affinity size does not match embedding rows");
    }
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    Matrix grad(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        double* gi = grad.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* zj = z.row(j);
            double d2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = zi[c] - zj[c];
                d2 += diff * diff;
            }
            const double mult = 4.0 * (p(i, j) - q(i, j)) / (1.0 + d2);
            for (std::size_t c = 0; c < d; ++c) {
                gi[c] += mult * (zi[c] - zj[c]);
            }
        }
    }
    return grad;
}

// Generic chain rule through q_ij = w_ij / S with w_ij = (1+||z_i-z_j||^2)^-1:
// given g_ij = dL/dq_ij,  dL/dw_ab = (g_ab - sum_ij g_ij q_ij) / S  and
// dw_ij/dz_i = -2 (z_i - z_j) w_ij^2.
inline Matrix chain_grad_through_q(const Matrix& g, const Matrix& q, const Matrix& z) {
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();

    Matrix w(n, n, 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* zj = z.row(j);
            double d2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = zi[c] - zj[c];
                d2 += diff * diff;
            }
            w(i, j) = 1.0 / (1.0 + d2);
            s += w(i, j);
        }
    }

    double gbar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) gbar += g(i, j) * q(i, j);
        }
    }

    Matrix grad(n, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        double* gi = grad.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* zj = z.row(j);
            const double coeff =
                -2.0 * ((g(i, j) - gbar) + (g(j, i) - gbar)) * w(i, j) * w(i, j) / s;
            for (std::size_t c = 0; c < d; ++c) {
                gi[c] += coeff * (zi[c] - zj[c]);
            }
        }
    }
    return grad;
}

} // namespace detail

/// Natural-log KL divergence sum_ij p_ij ln(p_ij / q_ij). Terms with
/// p_ij = 0 contribute zero; q is floored at 1e-12 inside the log.
inline double kl_divergence(const AffinityMatrix& p, const AffinityMatrix& q) {
    return detail::kl_value_raw(p.probs(), q.probs());
}

/// Renyi divergence (1/(alpha-1)) ln sum_ij p_ij^alpha q_ij^(1-alpha) over
/// off-diagonal entries. For alpha = 0.5 this is -2 ln sum sqrt(p q), twice
/// the negative log Bhattacharyya coefficient.
inline double renyi_divergence(const AffinityMatrix& p, const AffinityMatrix& q, double alpha) {
    if (alpha == 1.0) {
        throw InvalidConfigError("renyi_divergence: alpha = 1 is KL; use kl_divergence");
    }
    if (alpha <= 0.0) {
        throw InvalidConfigError("renyi_divergence: alpha must be positive");
    }
    detail::check_same_square(p.probs(), q.probs(), "renyi_divergence");
    const std::size_t n = p.n();
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double pij = p(i, j);
            if (pij == 0.0) continue;
            const double qij = q(i, j) < kProbFloor ? kProbFloor : q(i, j);
            t += std::pow(pij, alpha) * std::pow(qij, 1.0 - alpha);
        }
    }
    return std::log(t) / (alpha - 1.0);
}

/// Wasserstein-1 under the 0/1 ground metric: 0.5 sum_ij |p_ij - q_ij|,
/// i.e. the total variation distance. Always in [0, 1].
inline double wasserstein1_tv(const AffinityMatrix& p, const AffinityMatrix& q) {
    detail::check_same_square(p.probs(), q.probs(), "wasserstein1_tv");
    double acc = 0.0;
    const std::size_t n = p.n();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            acc += std::fabs(p(i, j) - q(i, j));
        }
    }
    return 0.5 * acc;
}

inline double divergence_value(const DivergenceKind& kind, const AffinityMatrix& p,
                               const AffinityMatrix& q) {
    switch (kind.tag) {
        case DivergenceKind::Tag::KL: return kl_divergence(p, q);
        case DivergenceKind::Tag::Renyi: return renyi_divergence(p, q, kind.alpha);
        case DivergenceKind::Tag::Wasserstein1TV: return wasserstein1_tv(p, q);
    }
    throw InvalidConfigError("divergence_value: unknown kind");
}

/// Analytic gradient of KL(P, Q(Z)) with respect to the embedding Z, where Q
/// must have been produced from Z by student_t_q.
inline Matrix kl_grad_wrt_z(const AffinityMatrix& p, const AffinityMatrix& q, const Matrix& z) {
    return detail::kl_grad_raw(p.probs(), q.probs(), z);
}

/// Analytic gradient of the selected divergence with respect to Z. The KL
/// kind delegates to kl_grad_wrt_z; the others chain dL/dq through the
/// Student-t normalization. The TV subgradient uses 0.5 sign(q - p) with 0 at
/// exact ties, so it vanishes at P = Q.
inline Matrix generic_grad_wrt_z(const DivergenceKind& kind, const AffinityMatrix& p,
                                 const AffinityMatrix& q, const Matrix& z) {
    if (p.n() != q.n() || q.n() != z.rows()) {
        throw InvalidInputError("generic_grad_wrt_z: dimension mismatch");
    }
    if (kind.tag == DivergenceKind::Tag::KL) {
        return kl_grad_wrt_z(p, q, z);
    }

    const std::size_t n = z.rows();
    Matrix g(n, n, 0.0);
    if (kind.tag == DivergenceKind::Tag::Renyi) {
        const double alpha = kind.alpha;
        if (alpha == 1.0 || alpha <= 0.0) {
            throw InvalidConfigError("generic_grad_wrt_z: invalid Renyi order");
        }
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || p(i, j) == 0.0) continue;
                const double qij = q(i, j) < kProbFloor ? kProbFloor : q(i, j);
                t += std::pow(p(i, j), alpha) * std::pow(qij, 1.0 - alpha);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || p(i, j) == 0.0) continue;
                if (q(i, j) < kProbFloor) continue; // clamped entries pass no gradient
                g(i, j) = -std::pow(p(i, j), alpha) * std::pow(q(i, j), -alpha) / t;
            }
        }
    } else { // Wasserstein1TV
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double diff = q(i, j) - p(i, j);
                if (diff > 0.0) g(i, j) = 0.5;
                else if (diff < 0.0) g(i, j) = -0.5;
            }
        }
    }
    return detail::chain_grad_through_q(g, q.probs(), z);
}

} // namespace dren
