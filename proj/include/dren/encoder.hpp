#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dren/error.hpp"
#include "dren/histogram.hpp"
#include "dren/matrix.hpp"
#include "dren/rng.hpp"

namespace dren {

// Hidden layer widths of the encoder; the fourth layer is the embedding.
inline constexpr std::size_t kHidden1 = 128;
inline constexpr std::size_t kHidden2 = 64;
inline constexpr std::size_t kHidden3 = 32;

struct EncoderConfig {
    std::size_t input_dim = 0; // raw feature dimension D
    std::size_t embed_dim = 2; // d
    std::size_t classes = 2;   // C
    bool histogram = false;
    std::size_t bins = 16;
    bool hist_concat = true;

    std::size_t encoder_input_dim() const {
        if (!histogram) return input_dim;
        return hist_concat ? input_dim + bins : bins;
    }
};

struct AdamState {
    Matrix m;
    Matrix v;
    std::int64_t step = 0;
};

/// Weights and biases of the encoder (input -> 128 -> 64 -> 32 -> d), the
/// softmax head (d -> C), the optional histogram layer parameters, and one
/// Adam state per tensor.
struct EncoderParams {
    EncoderConfig cfg;
    HistParams hist; // used only when cfg.histogram

    Matrix w1, b1;
    Matrix w2, b2;
    Matrix w3, b3;
    Matrix w4, b4;
    Matrix w_out, b_out;

    std::vector<AdamState> adam; // aligned with tensor declaration order
};

/// Trainable tensors in declaration order (histogram parameters first when
/// present). This order is the contract for gradients, Adam state and the
/// checkpoint layout.
inline std::vector<Matrix*> tensor_refs(EncoderParams& p) {
    std::vector<Matrix*> refs;
    if (p.cfg.histogram) {
        refs.push_back(&p.hist.centers);
        refs.push_back(&p.hist.widths);
    }
    for (Matrix* t : {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3, &p.w4, &p.b4, &p.w_out, &p.b_out}) {
        refs.push_back(t);
    }
    return refs;
}

inline std::vector<const Matrix*> tensor_refs(const EncoderParams& p) {
    std::vector<const Matrix*> refs;
    for (Matrix* t : tensor_refs(const_cast<EncoderParams&>(p))) refs.push_back(t);
    return refs;
}

inline std::vector<std::string> tensor_names(const EncoderParams& p) {
    std::vector<std::string> names;
    if (p.cfg.histogram) {
        names.push_back("hist_centers");
        names.push_back("hist_widths");
    }
    for (const char* n : {"w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4", "w_out", "b_out"}) {
        names.push_back(n);
    }
    return names;
}

/// Gradients for every trainable tensor, same order as tensor_refs.
struct EncoderGrads {
    std::vector<Matrix> tensors;
};

namespace detail {

inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, SeededRng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    return w;
}

inline void add_row_bias(Matrix& a, const Matrix& bias) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* r = a.row(i);
        const double* b = bias.row(0);
        for (std::size_t j = 0; j < a.cols(); ++j) r[j] += b[j];
    }
}

inline Matrix relu(const Matrix& a) {
    Matrix out = a;
    for (double& v : out.data()) {
        if (v < 0.0) v = 0.0;
    }
    return out;
}

// Zeroes entries of grad where the matching pre-activation was <= 0.
inline void apply_relu_mask(Matrix& grad, const Matrix& pre) {
    for (std::size_t k = 0; k < grad.data().size(); ++k) {
        if (pre.data()[k] <= 0.0) grad.data()[k] = 0.0;
    }
}

} // namespace detail

/// Fresh parameters: weights uniform in +/- sqrt(6 / (fan_in + fan_out))
/// drawn from the seeded stream in declaration order, biases zero. When the
/// config enables the histogram layer, `hist` supplies its initial
/// centers/widths (see init_hist_params).
inline EncoderParams init_encoder(const EncoderConfig& cfg, SeededRng& rng,
                                  const HistParams* hist = nullptr) {
    if (cfg.input_dim == 0 || cfg.embed_dim == 0 || cfg.classes < 2) {
        throw InvalidConfigError("init_encoder: bad dimensions");
    }
    EncoderParams p;
    p.cfg = cfg;
    if (cfg.histogram) {
        if (hist == nullptr) {
            throw InvalidConfigError("init_encoder: histogram enabled but no HistParams given");
        }
        p.hist = *hist;
    }
    const std::size_t in = cfg.encoder_input_dim();
    p.w1 = detail::glorot_uniform(in, kHidden1, rng);
    p.b1 = Matrix(1, kHidden1, 0.0);
    p.w2 = detail::glorot_uniform(kHidden1, kHidden2, rng);
    p.b2 = Matrix(1, kHidden2, 0.0);
    p.w3 = detail::glorot_uniform(kHidden2, kHidden3, rng);
    p.b3 = Matrix(1, kHidden3, 0.0);
    p.w4 = detail::glorot_uniform(kHidden3, cfg.embed_dim, rng);
    p.b4 = Matrix(1, cfg.embed_dim, 0.0);
    p.w_out = detail::glorot_uniform(cfg.embed_dim, cfg.classes, rng);
    p.b_out = Matrix(1, cfg.classes, 0.0);

    for (Matrix* t : tensor_refs(p)) {
        AdamState s;
        s.m = Matrix(t->rows(), t->cols(), 0.0);
        s.v = Matrix(t->rows(), t->cols(), 0.0);
        p.adam.push_back(std::move(s));
    }
    return p;
}

/// Everything the backward pass needs from a forward evaluation.
struct ForwardTrace {
    Matrix raw_input; // N x D, pre-histogram
    Matrix input;     // N x encoder_input_dim, post-histogram
    Matrix a1, h1;
    Matrix a2, h2;
    Matrix a3, h3;
    Matrix z;      // N x d embedding (layer 4, no activation)
    Matrix logits; // N x C
    Matrix y_hat;  // N x C, rows sum to 1
};

inline ForwardTrace forward(const EncoderParams& p, const Matrix& x) {
    if (x.cols() != p.cfg.input_dim) {
        throw InvalidInputError("forward: input has " + std::to_string(x.cols()) +
                                " columns, expected " + std::to_string(p.cfg.input_dim));
    }
    require_finite(x, "forward");

    ForwardTrace t;
    t.raw_input = x;
    t.input = p.cfg.histogram ? hist_forward(x, p.hist) : x;

    t.a1 = matmul(t.input, p.w1);
    detail::add_row_bias(t.a1, p.b1);
    t.h1 = detail::relu(t.a1);

    t.a2 = matmul(t.h1, p.w2);
    detail::add_row_bias(t.a2, p.b2);
    t.h2 = detail::relu(t.a2);

    t.a3 = matmul(t.h2, p.w3);
    detail::add_row_bias(t.a3, p.b3);
    t.h3 = detail::relu(t.a3);

    t.z = matmul(t.h3, p.w4);
    detail::add_row_bias(t.z, p.b4);

    t.logits = matmul(t.z, p.w_out);
    detail::add_row_bias(t.logits, p.b_out);
    t.y_hat = stable_softmax_rows(t.logits);
    return t;
}

/// One-hot label matrix from integer labels in [0, classes).
inline Matrix one_hot(const std::vector<int>& labels, std::size_t classes) {
    Matrix y(labels.size(), classes, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw InvalidInputError("one_hot: label out of range");
        }
        y(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return y;
}

/// Mean natural-log cross-entropy -(1/N) sum_ic y_ic ln y_hat_ic, with the
/// prediction floored at 1e-12 inside the log. `y` must be one-hot.
inline double cross_entropy(const Matrix& y_hat, const Matrix& y) {
    if (!y_hat.same_shape(y)) {
        throw InvalidInputError("cross_entropy: shape mismatch");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        int ones = 0;
        for (std::size_t c = 0; c < y.cols(); ++c) {
            const double yc = y(i, c);
            if (yc == 1.0) {
                ++ones;
                const double p = y_hat(i, c);
                loss -= std::log(p < 1e-12 ? 1e-12 : p);
            } else if (yc != 0.0) {
                throw InvalidInputError("cross_entropy: labels must be one-hot");
            }
        }
        if (ones != 1) {
            throw InvalidInputError("cross_entropy: labels must be one-hot");
        }
    }
    return loss / static_cast<double>(y.rows());
}

/// Gradients of L_total = (1 - lambda) L_class + lambda L_div.
///
/// The classification path contributes through the softmax head and the
/// embedding; the divergence path injects lambda * div_grad_z at the
/// embedding only (P is a constant by the stop-gradient rule, so nothing
/// flows through its construction). At lambda = 1 the head gradients are
/// exactly zero and the head never updates.
inline EncoderGrads backward(const EncoderParams& p, const ForwardTrace& t, const Matrix& y,
                             const Matrix& div_grad_z, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InvalidConfigError("backward: lambda must be in [0, 1]");
    }
    const std::size_t n = t.y_hat.rows();
    if (y.rows() != n || y.cols() != p.cfg.classes) {
        throw InvalidInputError("backward: label shape mismatch");
    }

    // Joint softmax + cross-entropy gradient: (Y_hat - Y) / N, scaled by the
    // classification weight.
    Matrix d_logits(n, p.cfg.classes, 0.0);
    if (lambda < 1.0) {
        const double scale = (1.0 - lambda) / static_cast<double>(n);
        for (std::size_t k = 0; k < d_logits.data().size(); ++k) {
            d_logits.data()[k] = scale * (t.y_hat.data()[k] - y.data()[k]);
        }
    }

    Matrix g_w_out = matmul_at_b(t.z, d_logits);
    Matrix g_b_out = col_sums(d_logits);
    Matrix d_z = matmul_a_bt(d_logits, p.w_out);

    if (lambda > 0.0) {
        if (div_grad_z.rows() != n || div_grad_z.cols() != p.cfg.embed_dim) {
            throw InvalidInputError("backward: divergence gradient shape mismatch");
        }
        for (std::size_t k = 0; k < d_z.data().size(); ++k) {
            d_z.data()[k] += lambda * div_grad_z.data()[k];
        }
    }

    // Layer 4 has no activation.
    Matrix g_w4 = matmul_at_b(t.h3, d_z);
    Matrix g_b4 = col_sums(d_z);
    Matrix d_h3 = matmul_a_bt(d_z, p.w4);

    detail::apply_relu_mask(d_h3, t.a3);
    Matrix g_w3 = matmul_at_b(t.h2, d_h3);
    Matrix g_b3 = col_sums(d_h3);
    Matrix d_h2 = matmul_a_bt(d_h3, p.w3);

    detail::apply_relu_mask(d_h2, t.a2);
    Matrix g_w2 = matmul_at_b(t.h1, d_h2);
    Matrix g_b2 = col_sums(d_h2);
    Matrix d_h1 = matmul_a_bt(d_h2, p.w2);

    detail::apply_relu_mask(d_h1, t.a1);
    Matrix g_w1 = matmul_at_b(t.input, d_h1);
    Matrix g_b1 = col_sums(d_h1);

    EncoderGrads g;
    if (p.cfg.histogram) {
        Matrix d_input = matmul_a_bt(d_h1, p.w1);
        HistGrads hg = hist_backward(t.raw_input, p.hist, d_input);
        g.tensors.push_back(std::move(hg.centers));
        g.tensors.push_back(std::move(hg.widths));
    }
    g.tensors.push_back(std::move(g_w1));
    g.tensors.push_back(std::move(g_b1));
    g.tensors.push_back(std::move(g_w2));
    g.tensors.push_back(std::move(g_b2));
    g.tensors.push_back(std::move(g_w3));
    g.tensors.push_back(std::move(g_b3));
    g.tensors.push_back(std::move(g_w4));
    g.tensors.push_back(std::move(g_b4));
    g.tensors.push_back(std::move(g_w_out));
    g.tensors.push_back(std::move(g_b_out));
    return g;
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam update applied tensor by tensor; each tensor's step
/// counter advances by one.
inline void adam_step(EncoderParams& p, const EncoderGrads& g, const AdamConfig& cfg = {}) {
    if (!(cfg.lr > 0.0) || !(cfg.beta1 > 0.0) || !(cfg.beta2 > 0.0) || !(cfg.eps > 0.0)) {
        throw InvalidConfigError("adam_step: hyperparameters must be positive");
    }
    auto refs = tensor_refs(p);
    if (g.tensors.size() != refs.size()) {
        throw InvalidInputError("adam_step: gradient tensor count mismatch");
    }
    for (std::size_t t = 0; t < refs.size(); ++t) {
        const Matrix& grad = g.tensors[t];
        if (!grad.same_shape(*refs[t])) {
            throw InvalidInputError("adam_step: gradient shape mismatch at tensor " +
                                    std::to_string(t));
        }
        if (!grad.all_finite()) {
            throw TrainingDivergedError("adam_step: non-finite gradient at tensor " +
                                        std::to_string(t));
        }
        AdamState& s = p.adam[t];
        s.step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.step));
        double* theta = refs[t]->data().data();
        double* m = s.m.data().data();
        double* v = s.v.data().data();
        const double* gr = grad.data().data();
        for (std::size_t k = 0; k < grad.size(); ++k) {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gr[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gr[k] * gr[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            theta[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
        if (!refs[t]->all_finite()) {
            throw TrainingDivergedError("adam_step: non-finite parameter after update");
        }
    }
}

/// Parameter vector across all tensors in declaration order; used by the
/// finite-difference oracle, never on the training path.
inline std::vector<double> flatten_params(const EncoderParams& p) {
    std::vector<double> flat;
    for (const Matrix* t : tensor_refs(p)) {
        flat.insert(flat.end(), t->data().begin(), t->data().end());
    }
    return flat;
}

inline void set_flat_params(EncoderParams& p, const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (Matrix* t : tensor_refs(p)) {
        for (double& v : t->data()) v = flat[pos++];
    }
    if (pos != flat.size()) {
        throw InvalidInputError("set_flat_params: length mismatch");
    }
}

inline std::vector<double> flatten_grads(const EncoderGrads& g) {
    std::vector<double> flat;
    for (const Matrix& t : g.tensors) {
        flat.insert(flat.end(), t.data().begin(), t.data().end());
    }
    return flat;
}

} // namespace dren
