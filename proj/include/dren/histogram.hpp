#pragma once

#include <cmath>
#include <cstddef>

#include "dren/error.hpp"
#include "dren/matrix.hpp"

namespace dren {

/// Differentiable soft-histogram transform. Each sample's feature vector is
/// mapped to `bins` normalized soft counts built from radial basis responses
/// around learnable centers; with `concat` set the counts are appended after
/// the raw features instead of replacing them.
struct HistParams {
    std::size_t bins = 16;
    bool concat = true;
    Matrix centers; // 1 x bins, strictly increasing at initialization
    Matrix widths;  // 1 x bins, positive

    std::size_t output_cols(std::size_t feature_cols) const {
        return concat ? feature_cols + bins : bins;
    }
};

/// Centers evenly spaced over the empirical [min, max] of the training
/// features; widths set to the reciprocal of the bin spacing.
inline HistParams init_hist_params(const Matrix& features, std::size_t bins, bool concat) {
    if (bins < 2) {
        throw InvalidConfigError("init_hist_params: need at least 2 bins");
    }
    require_finite(features, "init_hist_params");
    double lo = features.data()[0];
    double hi = features.data()[0];
    for (double v : features.data()) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    double spacing = (hi - lo) / static_cast<double>(bins - 1);
    if (spacing <= 0.0) spacing = 1.0; // constant features: arbitrary unit grid

    HistParams hp;
    hp.bins = bins;
    hp.concat = concat;
    hp.centers = Matrix(1, bins);
    hp.widths = Matrix(1, bins);
    for (std::size_t b = 0; b < bins; ++b) {
        hp.centers(0, b) = lo + spacing * static_cast<double>(b);
        hp.widths(0, b) = 1.0 / spacing;
    }
    return hp;
}

/// Soft count for bin b of sample i: (1/D) sum_d exp(-gamma_b^2 (x_id - mu_b)^2).
/// Counts lie in (0, 1]. Output is N x bins, or N x (D + bins) with the raw
/// features first when concat is set.
inline Matrix hist_forward(const Matrix& x, const HistParams& hp) {
    if (x.cols() < 1) {
        throw InvalidInputError("hist_forward: need at least one feature column");
    }
    if (hp.centers.cols() != hp.bins || hp.widths.cols() != hp.bins) {
        throw InvalidConfigError("hist_forward: parameter/bins size mismatch");
    }
    for (std::size_t b = 0; b < hp.bins; ++b) {
        if (!(hp.widths(0, b) > 0.0)) {
            throw InvalidConfigError("hist_forward: widths must be positive");
        }
    }

    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    const std::size_t offset = hp.concat ? dim : 0;
    Matrix out(n, hp.output_cols(dim), 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        if (hp.concat) {
            for (std::size_t d = 0; d < dim; ++d) oi[d] = xi[d];
        }
        for (std::size_t b = 0; b < hp.bins; ++b) {
            const double mu = hp.centers(0, b);
            const double gamma = hp.widths(0, b);
            double acc = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = xi[d] - mu;
                acc += std::exp(-gamma * gamma * diff * diff);
            }
            oi[offset + b] = acc / static_cast<double>(dim);
        }
    }
    return out;
}

struct HistGrads {
    Matrix centers; // 1 x bins
    Matrix widths;  // 1 x bins
    Matrix x;       // N x D, includes the raw pass-through when concat is set
};

/// Analytic partials of hist_forward against the upstream gradient, which
/// must match the forward output shape.
inline HistGrads hist_backward(const Matrix& x, const HistParams& hp, const Matrix& upstream) {
    const std::size_t n = x.rows();
    const std::size_t dim = x.cols();
    if (upstream.rows() != n || upstream.cols() != hp.output_cols(dim)) {
        throw InvalidInputError("hist_backward: upstream gradient shape mismatch");
    }

    HistGrads g;
    g.centers = Matrix(1, hp.bins, 0.0);
    g.widths = Matrix(1, hp.bins, 0.0);
    g.x = Matrix(n, dim, 0.0);

    const std::size_t offset = hp.concat ? dim : 0;
    const double inv_dim = 1.0 / static_cast<double>(dim);

    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        const double* ui = upstream.row(i);
        double* gxi = g.x.row(i);
        if (hp.concat) {
            for (std::size_t d = 0; d < dim; ++d) gxi[d] = ui[d];
        }
        for (std::size_t b = 0; b < hp.bins; ++b) {
            const double up = ui[offset + b];
            if (up == 0.0) continue;
            const double mu = hp.centers(0, b);
            const double gamma = hp.widths(0, b);
            const double g2 = gamma * gamma;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = xi[d] - mu;
                const double e = std::exp(-g2 * diff * diff) * inv_dim;
                g.centers(0, b) += up * e * 2.0 * g2 * diff;
                g.widths(0, b) += up * e * (-2.0 * gamma * diff * diff);
                gxi[d] += up * e * (-2.0 * g2 * diff);
            }
        }
    }
    return g;
}

} // namespace dren
