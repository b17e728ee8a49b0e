#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dren/affinity.hpp"
#include "dren/divergence.hpp"
#include "dren/encoder.hpp"
#include "dren/error.hpp"
#include "dren/eval.hpp"
#include "dren/matrix.hpp"
#include "dren/rng.hpp"

namespace dren {

/// Everything a single training run depends on. `divergence_disabled` is a
/// diagnostic switch that removes the divergence computation entirely (not
/// the same as lambda = 0, which still evaluates the divergence for the
/// report; both produce bitwise-identical parameter trajectories).
struct RunConfig {
    double lambda = 0.5;
    std::size_t embed_dim = 2;
    DivergenceKind divergence = DivergenceKind::kl();
    double perplexity = 15.0;
    std::size_t batch_size = 128;
    std::size_t epochs = 100;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double val_fraction = 0.10;
    std::uint64_t seed = 0;
    bool histogram = false;
    std::size_t bins = 16;
    std::size_t folds = 1;
    bool divergence_disabled = false;
};

inline void validate_config(const RunConfig& cfg) {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
        throw InvalidConfigError("lambda must be in [0,1]");
    }
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) {
        throw InvalidConfigError("val_fraction must be in (0,1)");
    }
    if (!(cfg.perplexity > 0.0) ||
        cfg.perplexity >= static_cast<double>(cfg.batch_size)) {
        throw InvalidConfigError("perplexity must be in (0, batch_size)");
    }
    if (cfg.embed_dim < 1 || cfg.epochs < 1 || cfg.batch_size < 3 || cfg.bins < 2) {
        throw InvalidConfigError("embed_dim >= 1, epochs >= 1, batch_size >= 3, bins >= 2 required");
    }
}

struct EpochStats {
    double total_loss = 0.0;  // always (1-lambda)*class + lambda*div of the fields below
    double class_loss = 0.0;
    double div_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
    std::string checkpoint_ref;      // set by callers that persist the checkpoint
    double wall_time_seconds = 0.0;  // excluded from serialized artifacts (byte stability)
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

/// Stratified holdout: per class, ceil(val_fraction * n_c) samples go to
/// validation (capped at n_c - 1 so every class keeps a training sample),
/// chosen by a seeded shuffle of that class's indices. Output index lists are
/// sorted ascending.
inline SplitIndices split_train_val(const std::vector<int>& y, double val_fraction,
                                    std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw InvalidConfigError("val_fraction must be in (0,1)");
    }
    int max_label = -1;
    for (int v : y) {
        if (v < 0) throw InvalidInputError("negative label");
        max_label = std::max(max_label, v);
    }
    if (max_label < 0) throw InvalidInputError("empty label vector");
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < y.size(); ++i) {
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }

    SeededRng rng(seed);
    SplitIndices out;
    for (std::size_t c = 0; c < classes; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 2) {
            throw InvalidInputError("class " + std::to_string(c) +
                                    " has fewer than 2 samples; cannot hold out validation");
        }
        rng.shuffle(idx);
        std::size_t take = static_cast<std::size_t>(
            std::ceil(val_fraction * static_cast<double>(idx.size())));
        take = std::min(take, idx.size() - 1);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            (j < take ? out.val : out.train).push_back(idx[j]);
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    return out;
}

namespace detail {

inline Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = x.row(idx[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = src[j];
    }
    return out;
}

inline std::vector<int> gather_labels(const std::vector<int>& y,
                                      const std::vector<std::size_t>& idx) {
    std::vector<int> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
    return out;
}

// Argmax prediction accuracy of the softmax head; argmax ties go to the
// lowest class index.
inline double head_accuracy(const EncoderParams& params, const Matrix& x,
                            const std::vector<int>& y) {
    const ForwardTrace trace = forward(params, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = trace.y_hat.row(i);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < trace.y_hat.cols(); ++c) {
            if (row[c] > row[arg]) arg = c;
        }
        if (static_cast<int>(arg) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

// Seed decorrelation between the split stream and the init/shuffle stream.
inline std::uint64_t train_stream_seed(std::uint64_t seed) {
    return seed ^ 0xD1B54A32D192ED03ull;
}

} // namespace detail

struct TrainResult {
    TrainReport report;
    EncoderParams params;  // parameters at the best-validation epoch
    SplitIndices split;
};

/// Joint training per Eq-style objective total = (1-lambda)*class +
/// lambda*divergence. Per epoch the training partition is reshuffled by the
/// run's PRNG and cut into consecutive mini-batches; a trailing batch smaller
/// than perplexity+2 is dropped. Per batch the target affinity P is built
/// from the encoder-input features of that batch and treated as a constant
/// (stop-gradient): only the divergence gradient with respect to Z enters
/// backpropagation. The parameters returned are those of the epoch with the
/// best validation accuracy (ties: lower total loss, then earlier epoch).
inline TrainResult train(const RunConfig& cfg, const Matrix& x, const std::vector<int>& y) {
    validate_config(cfg);
    if (x.rows() != y.size()) throw InvalidInputError("train: feature/label count mismatch");
    require_finite(x, "train features");
    int max_label = -1;
    for (int v : y) {
        if (v < 0) throw InvalidInputError("train: negative label");
        max_label = std::max(max_label, v);
    }
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;
    if (classes < 2) throw InvalidInputError("train: need at least 2 classes");
    if (static_cast<double>(x.rows()) < 2.0 * (cfg.perplexity + 2.0)) {
        throw InvalidInputError("train: dataset smaller than twice the minimum batch");
    }

    const SplitIndices split = split_train_val(y, cfg.val_fraction, cfg.seed);
    const Matrix x_train = detail::gather_rows(x, split.train);
    const std::vector<int> y_train = detail::gather_labels(y, split.train);
    const Matrix x_val = detail::gather_rows(x, split.val);
    const std::vector<int> y_val = detail::gather_labels(y, split.val);
    const std::size_t n_train = x_train.rows();

    // No usable mini-batch means the config cannot train at all.
    {
        const std::size_t full = n_train / cfg.batch_size;
        const std::size_t rem = n_train % cfg.batch_size;
        const bool rem_usable = static_cast<double>(rem) >= cfg.perplexity + 2.0;
        if (full + (rem_usable ? 1 : 0) == 0) {
            throw InvalidConfigError("train: no mini-batch reaches perplexity+2 samples");
        }
    }

    SeededRng rng(detail::train_stream_seed(cfg.seed));
    EncoderConfig enc_cfg;
    enc_cfg.input_dim = x.cols();
    enc_cfg.embed_dim = cfg.embed_dim;
    enc_cfg.classes = classes;
    enc_cfg.histogram = cfg.histogram;
    enc_cfg.bins = cfg.bins;
    HistParams hist;
    if (cfg.histogram) hist = init_hist_params(x_train, enc_cfg.bins, enc_cfg.hist_concat);
    EncoderParams params = init_encoder(enc_cfg, rng, cfg.histogram ? &hist : nullptr);

    const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    TrainResult result;
    result.split = split;
    result.params = params;
    TrainReport& report = result.report;
    double best_total = std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);

        double class_sum = 0.0;
        double div_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, n_train - start);
            if (count < cfg.batch_size &&
                static_cast<double>(count) < cfg.perplexity + 2.0) {
                break; // trailing batch too small for affinity calibration
            }
            std::vector<std::size_t> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(start + count));
            const Matrix xb = detail::gather_rows(x_train, batch_idx);
            const std::vector<int> yb = detail::gather_labels(y_train, batch_idx);

            const ForwardTrace trace = forward(params, xb);
            const Matrix y_onehot = one_hot(yb, classes);
            const double class_loss = cross_entropy(trace.y_hat, y_onehot);

            double div_loss = 0.0;
            Matrix div_grad_z(count, cfg.embed_dim, 0.0);
            if (!cfg.divergence_disabled) {
                PerplexityCalibration calib;
                calib.target_perplexity = cfg.perplexity;
                const AffinityMatrix p =
                    symmetrize_p(conditional_p(pairwise_sq_dists(trace.input), calib));
                const AffinityMatrix q = student_t_q(trace.z);
                div_loss = divergence_value(cfg.divergence, p, q);
                if (cfg.lambda > 0.0) {
                    div_grad_z = generic_grad_wrt_z(cfg.divergence, p, q, trace.z);
                }
            }

            const double total = (1.0 - cfg.lambda) * class_loss + cfg.lambda * div_loss;
            if (!std::isfinite(total)) {
                throw TrainingDivergedError("non-finite loss at epoch " + std::to_string(epoch));
            }
            class_sum += class_loss;
            div_sum += div_loss;
            ++batches;

            const EncoderGrads grads = backward(params, trace, y_onehot, div_grad_z, cfg.lambda);
            adam_step(params, grads, adam);
        }

        EpochStats stats;
        stats.class_loss = class_sum / static_cast<double>(batches);
        stats.div_loss = div_sum / static_cast<double>(batches);
        stats.total_loss = (1.0 - cfg.lambda) * stats.class_loss + cfg.lambda * stats.div_loss;
        stats.val_accuracy = detail::head_accuracy(params, x_val, y_val);
        report.epochs.push_back(stats);

        const bool better =
            !have_best || stats.val_accuracy > report.best_val_accuracy ||
            (stats.val_accuracy == report.best_val_accuracy && stats.total_loss < best_total);
        if (better) {
            have_best = true;
            report.best_epoch = epoch;
            report.best_val_accuracy = stats.val_accuracy;
            best_total = stats.total_loss;
            result.params = params;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sweep over (lambda, embed_dim) with repeated seeded folds per cell.
// ---------------------------------------------------------------------------

struct SweepCell {
    double lambda = 0.0;
    std::size_t embed_dim = 0;
    bool degenerate = false;  // lambda = 1: the head receives no gradient
    std::vector<double> fold_accuracies;  // best validation accuracy per successful fold
    std::vector<std::string> fold_errors; // failure messages, by fold index
    FoldStats stats;                      // over successful folds
    bool failed = false;                  // no fold succeeded
};

struct SweepReport {
    std::vector<SweepCell> cells;
    std::size_t folds = 0;
};

/// Runs folds x |lambdas| x |dims| independent trainings. Fold seeds are
/// base.seed XOR the global run index, so cells are independent of scheduling
/// order. Per-cell failures are recorded without aborting the sweep.
inline SweepReport sweep(const RunConfig& base, const std::vector<double>& lambdas,
                         const std::vector<std::size_t>& dims, std::size_t folds,
                         const Matrix& x, const std::vector<int>& y) {
    if (lambdas.empty() || dims.empty() || folds < 1) {
        throw InvalidConfigError("sweep: lambda grid, dim grid, and folds must be nonempty");
    }
    SweepReport report;
    report.folds = folds;
    std::size_t run_index = 0;
    for (double lambda : lambdas) {
        for (std::size_t d : dims) {
            SweepCell cell;
            cell.lambda = lambda;
            cell.embed_dim = d;
            cell.degenerate = lambda == 1.0;
            std::vector<MetricsRecord> records;
            for (std::size_t fold = 0; fold < folds; ++fold, ++run_index) {
                RunConfig cfg = base;
                cfg.lambda = lambda;
                cfg.embed_dim = d;
                cfg.seed = base.seed ^ static_cast<std::uint64_t>(run_index);
                cfg.folds = folds;
                try {
                    const TrainResult run = train(cfg, x, y);
                    cell.fold_accuracies.push_back(run.report.best_val_accuracy);
                    MetricsRecord rec;
                    rec.overall_accuracy = run.report.best_val_accuracy;
                    rec.fold_id = fold;
                    records.push_back(rec);
                    cell.fold_errors.emplace_back();
                } catch (const DrenError& e) {
                    cell.fold_errors.emplace_back(e.what());
                }
            }
            if (records.empty()) {
                cell.failed = true;
            } else {
                cell.stats = aggregate_folds(records);
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

} // namespace dren
