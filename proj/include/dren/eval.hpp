#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dren/error.hpp"
#include "dren/matrix.hpp"

namespace dren {

struct MetricsRecord {
    double overall_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    Matrix confusion; // C x C, row = true class, column = predicted class
    int fold_id = 0;
    std::string config_hash;
};

/// Brute-force k-nearest-neighbor vote in Euclidean distance. Distance ties
/// are broken by the lower training index; a tied vote falls back to the
/// label of the nearest neighbor among the tied classes.
inline std::vector<int> knn_predict(const Matrix& z_train, const std::vector<int>& y_train,
                                    const Matrix& z_test, std::size_t k) {
    if (z_train.rows() == 0) {
        throw InvalidInputError("knn_predict: empty training set");
    }
    if (y_train.size() != z_train.rows()) {
        throw InvalidInputError("knn_predict: label count mismatch");
    }
    if (k < 1 || k > z_train.rows()) {
        throw InvalidConfigError("knn_predict: k must be in [1, N_train]");
    }
    if (z_train.cols() != z_test.cols()) {
        throw InvalidInputError("knn_predict: embedding dimensions differ");
    }

    int max_label = 0;
    for (int y : y_train) max_label = std::max(max_label, y);
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    std::vector<int> pred(z_test.rows(), 0);
    std::vector<std::pair<double, std::size_t>> order(z_train.rows());
    std::vector<std::size_t> votes(classes);

    for (std::size_t t = 0; t < z_test.rows(); ++t) {
        const double* zt = z_test.row(t);
        for (std::size_t i = 0; i < z_train.rows(); ++i) {
            const double* zi = z_train.row(i);
            double d2 = 0.0;
            for (std::size_t c = 0; c < z_test.cols(); ++c) {
                const double diff = zt[c] - zi[c];
                d2 += diff * diff;
            }
            order[i] = {d2, i};
        }
        std::sort(order.begin(), order.end());

        std::fill(votes.begin(), votes.end(), 0);
        for (std::size_t j = 0; j < k; ++j) {
            votes[static_cast<std::size_t>(y_train[order[j].second])] += 1;
        }
        const std::size_t best = *std::max_element(votes.begin(), votes.end());
        // Nearest neighbor whose class is among the top-voted ones wins.
        for (std::size_t j = 0; j < k; ++j) {
            const int label = y_train[order[j].second];
            if (votes[static_cast<std::size_t>(label)] == best) {
                pred[t] = label;
                break;
            }
        }
    }
    return pred;
}

/// Overall and per-class accuracy plus the confusion matrix.
inline MetricsRecord accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) {
        throw InvalidInputError("accuracy: length mismatch");
    }
    if (pred.empty()) {
        throw InvalidInputError("accuracy: empty predictions");
    }
    int max_label = 0;
    for (int y : truth) max_label = std::max(max_label, y);
    for (int y : pred) max_label = std::max(max_label, y);
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    MetricsRecord rec;
    rec.confusion = Matrix(classes, classes, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        rec.confusion(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i])) += 1.0;
    }
    double correct = 0.0;
    rec.per_class_accuracy.assign(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        double row_total = 0.0;
        for (std::size_t j = 0; j < classes; ++j) row_total += rec.confusion(c, j);
        if (row_total > 0.0) {
            rec.per_class_accuracy[c] = rec.confusion(c, c) / row_total;
        }
        correct += rec.confusion(c, c);
    }
    rec.overall_accuracy = correct / static_cast<double>(pred.size());
    return rec;
}

struct FoldStats {
    double mean = 0.0;
    double stddev = 0.0; // sample (n-1) standard deviation, 0 for a single fold
};

inline FoldStats aggregate_folds(const std::vector<MetricsRecord>& records) {
    if (records.empty()) {
        throw InvalidInputError("aggregate_folds: no records");
    }
    FoldStats s;
    for (const auto& r : records) s.mean += r.overall_accuracy;
    s.mean /= static_cast<double>(records.size());
    if (records.size() > 1) {
        double ss = 0.0;
        for (const auto& r : records) {
            const double d = r.overall_accuracy - s.mean;
            ss += d * d;
        }
        s.stddev = std::sqrt(ss / static_cast<double>(records.size() - 1));
    }
    return s;
}

} // namespace dren
