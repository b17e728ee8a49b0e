#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "dren/dataset.hpp"
#include "dren/error.hpp"
#include "dren/eval.hpp"
#include "dren/trainer.hpp"

namespace dren {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// RunConfig <-> JSON (also the checkpoint sidecar format).
// ---------------------------------------------------------------------------

inline json run_config_to_json(const RunConfig& cfg) {
    return json{
        {"lambda", cfg.lambda},
        {"embed_dim", cfg.embed_dim},
        {"divergence", cfg.divergence.name()},
        {"alpha", cfg.divergence.alpha},
        {"perplexity", cfg.perplexity},
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"lr", cfg.lr},
        {"beta1", cfg.beta1},
        {"beta2", cfg.beta2},
        {"eps", cfg.eps},
        {"val_fraction", cfg.val_fraction},
        {"seed", cfg.seed},
        {"histogram", cfg.histogram},
        {"bins", cfg.bins},
        {"folds", cfg.folds},
        {"divergence_disabled", cfg.divergence_disabled},
    };
}

inline DivergenceKind divergence_from_name(const std::string& name, double alpha) {
    if (name == "kl") return DivergenceKind::kl();
    if (name == "renyi") return DivergenceKind::renyi(alpha);
    if (name == "w1") return DivergenceKind::wasserstein1_tv();
    throw InvalidConfigError("unknown divergence '" + name + "' (expected kl|renyi|w1)");
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    cfg.lambda = j.at("lambda").get<double>();
    cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
    cfg.divergence = divergence_from_name(j.at("divergence").get<std::string>(),
                                          j.at("alpha").get<double>());
    cfg.perplexity = j.at("perplexity").get<double>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.lr = j.at("lr").get<double>();
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.eps = j.at("eps").get<double>();
    cfg.val_fraction = j.at("val_fraction").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.histogram = j.at("histogram").get<bool>();
    cfg.bins = j.at("bins").get<std::size_t>();
    cfg.folds = j.at("folds").get<std::size_t>();
    cfg.divergence_disabled = j.at("divergence_disabled").get<bool>();
    return cfg;
}

/// Hash of the canonical JSON form; stamped into MetricsRecords and manifests.
inline std::string config_hash(const RunConfig& cfg) {
    return hash_hex(fnv1a64(run_config_to_json(cfg).dump()));
}

// ---------------------------------------------------------------------------
// TrainReport <-> JSON. Wall time is deliberately not serialized so repeated
// same-seed runs emit byte-identical artifacts.
// ---------------------------------------------------------------------------

inline json train_report_to_json(const TrainReport& report) {
    json epochs = json::array();
    for (const EpochStats& e : report.epochs) {
        epochs.push_back(json{
            {"total_loss", e.total_loss},
            {"class_loss", e.class_loss},
            {"div_loss", e.div_loss},
            {"val_accuracy", e.val_accuracy},
        });
    }
    return json{
        {"epochs", std::move(epochs)},
        {"best_epoch", report.best_epoch},
        {"best_val_accuracy", report.best_val_accuracy},
        {"checkpoint", report.checkpoint_ref},
    };
}

inline TrainReport train_report_from_json(const json& j) {
    TrainReport report;
    for (const json& e : j.at("epochs")) {
        EpochStats s;
        s.total_loss = e.at("total_loss").get<double>();
        s.class_loss = e.at("class_loss").get<double>();
        s.div_loss = e.at("div_loss").get<double>();
        s.val_accuracy = e.at("val_accuracy").get<double>();
        report.epochs.push_back(s);
    }
    report.best_epoch = j.at("best_epoch").get<std::size_t>();
    report.best_val_accuracy = j.at("best_val_accuracy").get<double>();
    report.checkpoint_ref = j.at("checkpoint").get<std::string>();
    return report;
}

// ---------------------------------------------------------------------------
// MetricsRecord <-> JSON.
// ---------------------------------------------------------------------------

inline json metrics_to_json(const MetricsRecord& rec) {
    json confusion = json::array();
    for (std::size_t i = 0; i < rec.confusion.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < rec.confusion.cols(); ++j) {
            row.push_back(rec.confusion(i, j));
        }
        confusion.push_back(std::move(row));
    }
    return json{
        {"overall_accuracy", rec.overall_accuracy},
        {"per_class_accuracy", rec.per_class_accuracy},
        {"confusion", std::move(confusion)},
        {"fold_id", rec.fold_id},
        {"config_hash", rec.config_hash},
    };
}

inline MetricsRecord metrics_from_json(const json& j) {
    MetricsRecord rec;
    rec.overall_accuracy = j.at("overall_accuracy").get<double>();
    rec.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
    const json& confusion = j.at("confusion");
    const std::size_t c = confusion.size();
    rec.confusion = Matrix(c, c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t k = 0; k < c; ++k) {
            rec.confusion(i, k) = confusion.at(i).at(k).get<double>();
        }
    }
    rec.fold_id = j.at("fold_id").get<std::size_t>();
    rec.config_hash = j.at("config_hash").get<std::string>();
    return rec;
}

// ---------------------------------------------------------------------------
// Sweep report.
// ---------------------------------------------------------------------------

inline json sweep_report_to_json(const SweepReport& report) {
    json cells = json::array();
    for (const SweepCell& cell : report.cells) {
        json c{
            {"lambda", cell.lambda},
            {"embed_dim", cell.embed_dim},
            {"fold_accuracies", cell.fold_accuracies},
            {"fold_errors", cell.fold_errors},
            {"failed", cell.failed},
        };
        if (!cell.failed) {
            c["mean_accuracy"] = cell.stats.mean;
            c["std_accuracy"] = cell.stats.stddev;
        }
        if (cell.degenerate) c["warning"] = "unsupervised-degenerate";
        cells.push_back(std::move(c));
    }
    return json{{"folds", report.folds}, {"cells", std::move(cells)}};
}

/// Fixed-width text table, one row per lambda, one column per embedding
/// dimension; cells show mean +/- std validation accuracy in percent.
inline std::string sweep_table_text(const SweepReport& report) {
    std::vector<double> lambdas;
    std::vector<std::size_t> dims;
    for (const SweepCell& cell : report.cells) {
        if (std::find(lambdas.begin(), lambdas.end(), cell.lambda) == lambdas.end()) {
            lambdas.push_back(cell.lambda);
        }
        if (std::find(dims.begin(), dims.end(), cell.embed_dim) == dims.end()) {
            dims.push_back(cell.embed_dim);
        }
    }
    auto cell_at = [&](double lambda, std::size_t d) -> const SweepCell* {
        for (const SweepCell& cell : report.cells) {
            if (cell.lambda == lambda && cell.embed_dim == d) return &cell;
        }
        return nullptr;
    };
    char buf[64];
    std::string out = "lambda    ";
    for (std::size_t d : dims) {
        std::snprintf(buf, sizeof(buf), "%-18s", ("d=" + std::to_string(d)).c_str());
        out += buf;
    }
    out += '\n';
    for (double lambda : lambdas) {
        std::snprintf(buf, sizeof(buf), "%-10.3g", lambda);
        out += buf;
        for (std::size_t d : dims) {
            const SweepCell* cell = cell_at(lambda, d);
            if (cell == nullptr || cell->failed) {
                std::snprintf(buf, sizeof(buf), "%-18s", "failed");
            } else {
                std::snprintf(buf, sizeof(buf), "%6.2f%% +/-%5.2f%%  ",
                              100.0 * cell->stats.mean, 100.0 * cell->stats.stddev);
            }
            out += buf;
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// File helpers.
// ---------------------------------------------------------------------------

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

} // namespace dren
