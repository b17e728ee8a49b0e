#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dren/affinity.hpp"
#include "dren/divergence.hpp"
#include "dren/error.hpp"
#include "dren/matrix.hpp"
#include "dren/rng.hpp"

namespace dren {

/// Classical t-SNE settings. The optimizer constants (learning rate 100,
/// momentum 0.5 switching to 0.8 at iteration 250, fourfold early
/// exaggeration for the first 50 iterations, Gaussian init with std 1e-4)
/// follow the reference implementation of the algorithm.
struct TsneConfig {
    double perplexity = 15.0;
    int iterations = 1000;
    double learning_rate = 100.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    double exaggeration = 4.0;
    int exaggeration_iters = 50;
    std::size_t embed_dim = 2;
    double init_std = 1e-4;
    std::uint64_t seed = 0;
};

struct TsneResult {
    Matrix embedding;  // N x d
    double initial_kl = 0.0;
    double final_kl = 0.0;
    std::size_t unconverged_rows = 0; // perplexity searches that hit max_iterations
};

/// Direct gradient descent with momentum on KL(P, Q(Z)). P is multiplied by
/// the exaggeration factor during the exaggeration window and restored
/// afterwards; the reported KL values always use the true P.
inline TsneResult tsne_fit(const Matrix& x, const TsneConfig& cfg) {
    const std::size_t n = x.rows();
    if (n < 5) {
        throw InvalidInputError("tsne_fit: need at least 5 samples");
    }
    if (cfg.iterations <= cfg.exaggeration_iters) {
        throw InvalidConfigError("tsne_fit: iterations must exceed the exaggeration window");
    }
    if (!(cfg.perplexity > 0.0) || cfg.perplexity >= static_cast<double>(n)) {
        throw InvalidConfigError("tsne_fit: perplexity must be in (0, N)");
    }

    PerplexityCalibration calib;
    calib.target_perplexity = cfg.perplexity;
    const Matrix cond = conditional_p(pairwise_sq_dists(x), calib);
    Matrix p = symmetrize_p(cond).probs();

    SeededRng rng(cfg.seed);
    Matrix z = rng.normal_matrix(n, cfg.embed_dim, cfg.init_std);
    Matrix velocity(n, cfg.embed_dim, 0.0);

    TsneResult result;
    result.unconverged_rows = calib.unconverged_rows();
    result.initial_kl = detail::kl_value_raw(p, student_t_q(z).probs());

    const double factor = cfg.exaggeration;
    if (cfg.exaggeration_iters > 0 && factor != 1.0) {
        for (double& v : p.data()) v *= factor;
    }

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        if (iter == cfg.exaggeration_iters && cfg.exaggeration_iters > 0 && factor != 1.0) {
            for (double& v : p.data()) v /= factor;
        }
        const Matrix q = student_t_q(z).probs();
        const Matrix grad = detail::kl_grad_raw(p, q, z);
        const double momentum =
            iter < cfg.momentum_switch_iter ? cfg.initial_momentum : cfg.final_momentum;
        for (std::size_t k = 0; k < z.data().size(); ++k) {
            velocity.data()[k] =
                momentum * velocity.data()[k] - cfg.learning_rate * grad.data()[k];
            z.data()[k] += velocity.data()[k];
        }
        // Divergence check: non-finite coordinates, or magnitudes so large the
        // next squared-distance pass would overflow.
        bool diverged = !z.all_finite();
        if (!diverged) {
            for (double v : z.data()) {
                if (std::fabs(v) > 1e150) {
                    diverged = true;
                    break;
                }
            }
        }
        if (diverged) {
            throw OptimizationFailedError("tsne_fit: embedding diverged at iteration " +
                                          std::to_string(iter));
        }
    }

    if (cfg.exaggeration_iters >= cfg.iterations && factor != 1.0) {
        for (double& v : p.data()) v /= factor; // window never closed
    }
    result.final_kl = detail::kl_value_raw(p, student_t_q(z).probs());
    result.embedding = std::move(z);
    return result;
}

/// Reconstruction weights for one unseen point over its k nearest training
/// neighbors.
struct OosEntry {
    std::vector<std::size_t> neighbors;
    std::vector<double> weights; // sums to 1
};

struct OosWeights {
    std::vector<OosEntry> entries;
    std::size_t k = 0;
    double epsilon = 1e-3; // Tikhonov factor relative to trace(G)/k
};

namespace detail {

// Solves the small symmetric system G w = 1 by Gaussian elimination with
// partial pivoting. Returns false when the pivoting breaks down (all
// neighbors coincident with the query), in which case the caller falls back
// to uniform weights.
inline bool solve_ones(Matrix g, std::vector<double>& w) {
    const std::size_t k = g.rows();
    w.assign(k, 1.0);
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::fabs(g(r, col)) > std::fabs(g(pivot, col))) pivot = r;
        }
        if (std::fabs(g(pivot, col)) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(g(col, c), g(pivot, c));
            std::swap(w[col], w[pivot]);
        }
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = g(r, col) / g(col, col);
            for (std::size_t c = col; c < k; ++c) g(r, c) -= f * g(col, c);
            w[r] -= f * w[col];
        }
    }
    for (std::size_t col = k; col-- > 0;) {
        double acc = w[col];
        for (std::size_t c = col + 1; c < k; ++c) acc -= g(col, c) * w[c];
        w[col] = acc / g(col, col);
    }
    return true;
}

} // namespace detail

/// Constrained linear-reconstruction weights for `x_test` over its k nearest
/// training rows: minimize ||x_test - sum_j w_j x_j||^2 subject to
/// sum w = 1, via the local Gram system built from centered differences with
/// Tikhonov regularization epsilon * trace(G)/k on the diagonal.
/// `exclude_exact_matches` skips training rows at distance exactly zero (off
/// by default, so a training point used as a query reconstructs itself).
inline OosEntry lle_weights(const double* x_test, const Matrix& x_train, std::size_t k,
                            double epsilon = 1e-3, bool exclude_exact_matches = false) {
    const std::size_t n = x_train.rows();
    const std::size_t dim = x_train.cols();
    if (k < 1 || k > n) {
        throw InvalidConfigError("lle_weights: k must be in [1, N_train]");
    }

    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x_train.row(i);
        double d2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double diff = x_test[c] - xi[c];
            d2 += diff * diff;
        }
        if (exclude_exact_matches && d2 == 0.0) continue;
        order.emplace_back(d2, i);
    }
    if (order.size() < k) {
        throw InvalidConfigError("lle_weights: fewer than k usable neighbors");
    }
    std::sort(order.begin(), order.end());

    OosEntry entry;
    entry.neighbors.resize(k);
    for (std::size_t j = 0; j < k; ++j) entry.neighbors[j] = order[j].second;

    // Gram matrix of centered differences; translation of the feature space
    // cancels out here.
    Matrix g(k, k, 0.0);
    double trace = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        const double* xa = x_train.row(entry.neighbors[a]);
        for (std::size_t b = a; b < k; ++b) {
            const double* xb = x_train.row(entry.neighbors[b]);
            double dot = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                dot += (x_test[c] - xa[c]) * (x_test[c] - xb[c]);
            }
            g(a, b) = dot;
            g(b, a) = dot;
        }
        trace += g(a, a);
    }
    const double reg = epsilon * trace / static_cast<double>(k);
    for (std::size_t a = 0; a < k; ++a) g(a, a) += reg;

    if (!detail::solve_ones(std::move(g), entry.weights)) {
        entry.weights.assign(k, 1.0 / static_cast<double>(k));
        return entry;
    }
    double sum = 0.0;
    for (double w : entry.weights) sum += w;
    for (double& w : entry.weights) w /= sum;
    return entry;
}

inline OosWeights lle_weights_batch(const Matrix& x_test, const Matrix& x_train, std::size_t k,
                                    double epsilon = 1e-3, bool exclude_exact_matches = false) {
    if (x_test.cols() != x_train.cols()) {
        throw InvalidInputError("lle_weights_batch: feature dimensions differ");
    }
    OosWeights out;
    out.k = k;
    out.epsilon = epsilon;
    out.entries.reserve(x_test.rows());
    for (std::size_t i = 0; i < x_test.rows(); ++i) {
        out.entries.push_back(lle_weights(x_test.row(i), x_train, k, epsilon, exclude_exact_matches));
    }
    return out;
}

/// Test embeddings as weighted combinations of training embeddings:
/// z_test = sum_j w_j z_train[nbr_j].
inline Matrix oos_embed(const OosWeights& weights, const Matrix& z_train) {
    Matrix z(weights.entries.size(), z_train.cols(), 0.0);
    for (std::size_t i = 0; i < weights.entries.size(); ++i) {
        const OosEntry& e = weights.entries[i];
        double* zi = z.row(i);
        for (std::size_t j = 0; j < e.neighbors.size(); ++j) {
            if (e.neighbors[j] >= z_train.rows()) {
                throw InvalidInputError("oos_embed: neighbor index out of range");
            }
            const double* zn = z_train.row(e.neighbors[j]);
            for (std::size_t c = 0; c < z_train.cols(); ++c) {
                zi[c] += e.weights[j] * zn[c];
            }
        }
    }
    return z;
}

} // namespace dren
