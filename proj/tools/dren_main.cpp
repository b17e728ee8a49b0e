// Command-line driver: train, sweep, compare-tsne, tsne, embed-oos, knn-eval,
// synth. Every command writes its artifacts into --out (default: $DREN_OUT_DIR
// or the working directory) plus a manifest with the full config and FNV-1a
// hashes of inputs and artifacts. Given a fixed flag set, artifacts are
// byte-identical across runs.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dren/dren.hpp"

namespace fs = std::filesystem;
using dren::json;
using dren::Matrix;

namespace {

std::string resolve_out_dir(std::string out) {
    if (out.empty()) {
        const char* env = std::getenv("DREN_OUT_DIR");
        out = (env != nullptr && env[0] != '\0') ? env : ".";
    }
    fs::create_directories(out);
    return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return dir + "/" + name;
}

// ---------------------------------------------------------------------------
// Dataset input: either feature/label files or a synthetic spec.
// ---------------------------------------------------------------------------

struct DataOpts {
    std::string features;
    std::string labels;
    std::string names;
    std::string synth; // blobs|rings|helix; empty = file input
    std::size_t classes = 3;
    std::size_t synth_dim = 10;
    std::size_t per_class = 100;
    double separation = 10.0;
    double stddev = 1.0;
    std::uint64_t data_seed = 0;
    CLI::Option* data_seed_opt = nullptr;
};

void add_data_opts(CLI::App* cmd, DataOpts& d) {
    cmd->add_option("--features", d.features, "Feature grid (comma-separated decimal text)");
    cmd->add_option("--labels", d.labels, "Labels (one integer in [0,C) per line)");
    cmd->add_option("--names", d.names, "Optional class-name map ('id,name' lines)");
    cmd->add_option("--synth", d.synth, "Generate data instead: blobs|rings|helix")
        ->check(CLI::IsMember({"blobs", "rings", "helix"}));
    cmd->add_option("--classes", d.classes, "Synthetic class count")->check(CLI::PositiveNumber);
    cmd->add_option("--synth-dim", d.synth_dim, "Synthetic feature dimension")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--per-class", d.per_class, "Synthetic samples per class")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--separation", d.separation, "Synthetic class separation")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--std", d.stddev, "Synthetic within-class standard deviation")
        ->check(CLI::PositiveNumber);
    d.data_seed_opt =
        cmd->add_option("--data-seed", d.data_seed, "Generator seed (default: --seed)");
}

dren::SynthSpec synth_spec_from(const DataOpts& d, std::uint64_t default_seed) {
    dren::SynthSpec spec;
    spec.kind = dren::synth_kind_from_name(d.synth);
    spec.classes = d.classes;
    spec.dim = d.synth_dim;
    spec.per_class = d.per_class;
    spec.separation = d.separation;
    spec.stddev = d.stddev;
    spec.seed = (d.data_seed_opt != nullptr && d.data_seed_opt->count() > 0) ? d.data_seed
                                                                             : default_seed;
    return spec;
}

json synth_spec_to_json(const dren::SynthSpec& spec, const std::string& layout) {
    json j{
        {"generator", dren::synth_kind_name(spec.kind)},
        {"classes", spec.classes},
        {"dim", spec.dim},
        {"per_class", spec.per_class},
        {"separation", spec.separation},
        {"std", spec.stddev},
        {"seed", spec.seed},
    };
    if (!layout.empty()) j["center_layout"] = layout;
    return j;
}

struct LoadedData {
    Matrix x;
    std::vector<int> y;
    std::size_t classes = 0;
    std::vector<std::string> names;
    json inputs; // manifest fragment: file hashes or the synth spec
};

LoadedData load_data(const DataOpts& d, std::uint64_t default_seed) {
    LoadedData data;
    if (!d.synth.empty()) {
        const dren::SynthSpec spec = synth_spec_from(d, default_seed);
        dren::SynthResult gen = dren::gen_synthetic(spec);
        data.x = std::move(gen.x);
        data.y = std::move(gen.labels);
        data.classes = spec.classes;
        data.inputs = json{{"synth", synth_spec_to_json(spec, gen.center_layout)}};
    } else {
        if (d.features.empty() || d.labels.empty()) {
            throw dren::InvalidConfigError("either --synth or both --features and --labels required");
        }
        data.x = dren::load_features(d.features);
        data.y = dren::load_labels(d.labels);
        data.classes = dren::validate_dataset(data.x, data.y);
        json files{
            {"features", json{{"path", d.features}, {"fnv1a64", dren::file_hash_hex(d.features)}}},
            {"labels", json{{"path", d.labels}, {"fnv1a64", dren::file_hash_hex(d.labels)}}},
        };
        if (!d.names.empty()) {
            files["names"] = json{{"path", d.names}, {"fnv1a64", dren::file_hash_hex(d.names)}};
        }
        data.inputs = json{{"files", std::move(files)}};
    }
    if (!d.names.empty()) data.names = dren::load_name_map(d.names);
    return data;
}

void write_manifest(const std::string& dir, const std::string& command, json config, json inputs,
                    const std::vector<std::string>& artifact_names) {
    json artifacts = json::object();
    for (const std::string& name : artifact_names) {
        artifacts[name] = dren::file_hash_hex(join_path(dir, name));
    }
    std::string stem = command;
    for (char& c : stem) {
        if (c == '-') c = '_';
    }
    dren::write_json(join_path(dir, stem + "_manifest.json"),
                     json{{"command", command},
                          {"config", std::move(config)},
                          {"inputs", std::move(inputs)},
                          {"artifacts", std::move(artifacts)}});
}

// ---------------------------------------------------------------------------
// Shared training flags.
// ---------------------------------------------------------------------------

struct TrainOpts {
    DataOpts data;
    double lambda = 0.5;
    std::size_t dim = 2;
    std::string divergence = "kl";
    double alpha = 0.5;
    double perplexity = 15.0;
    std::size_t batch = 128;
    std::size_t epochs = 100;
    double lr = 1e-3;
    double val_fraction = 0.10;
    std::uint64_t seed = 0;
    bool histogram = false;
    std::size_t bins = 16;
    bool no_divergence = false;
    std::string out;
};

void add_train_opts(CLI::App* cmd, TrainOpts& t, bool with_lambda_dim = true) {
    add_data_opts(cmd, t.data);
    if (with_lambda_dim) {
        cmd->add_option("--lambda", t.lambda, "Weight of the divergence term")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--dim", t.dim, "Embedding dimension d")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--divergence", t.divergence, "Divergence: kl|renyi|w1")
        ->check(CLI::IsMember({"kl", "renyi", "w1"}));
    cmd->add_option("--alpha", t.alpha, "Renyi order (used with --divergence renyi)");
    cmd->add_option("--perplexity", t.perplexity, "Affinity calibration target")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batch", t.batch, "Mini-batch size");
    cmd->add_option("--epochs", t.epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", t.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd->add_option("--val-fraction", t.val_fraction, "Held-out validation fraction");
    cmd->add_option("--seed", t.seed, "Run seed");
    cmd->add_flag("--histogram", t.histogram, "Prepend the soft histogram layer");
    cmd->add_option("--bins", t.bins, "Histogram bin count");
    cmd->add_flag("--no-divergence", t.no_divergence,
                  "Diagnostic: remove the divergence computation entirely");
    cmd->add_option("--out", t.out, "Output directory (default: $DREN_OUT_DIR or .)");
}

dren::RunConfig run_config_from(const TrainOpts& t) {
    dren::RunConfig cfg;
    cfg.lambda = t.lambda;
    cfg.embed_dim = t.dim;
    cfg.divergence = dren::divergence_from_name(t.divergence, t.alpha);
    cfg.perplexity = t.perplexity;
    cfg.batch_size = t.batch;
    cfg.epochs = t.epochs;
    cfg.lr = t.lr;
    cfg.val_fraction = t.val_fraction;
    cfg.seed = t.seed;
    cfg.histogram = t.histogram;
    cfg.bins = t.bins;
    cfg.divergence_disabled = t.no_divergence;
    return cfg;
}

std::string describe(const dren::RunConfig& cfg) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "lambda=%g, %s, d=%zu", cfg.lambda,
                  cfg.divergence.name(), cfg.embed_dim);
    return buf;
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

void cmd_train(const TrainOpts& opts) {
    const std::string dir = resolve_out_dir(opts.out);
    const LoadedData data = load_data(opts.data, opts.seed);
    const dren::RunConfig cfg = run_config_from(opts);

    dren::TrainResult result = dren::train(cfg, data.x, data.y);
    result.report.checkpoint_ref = "train_checkpoint.bin";

    dren::save_checkpoint(join_path(dir, "train_checkpoint.bin"), result.params, cfg);
    dren::write_json(join_path(dir, "train_report.json"),
                     dren::train_report_to_json(result.report));
    const Matrix z = dren::forward(result.params, data.x).z;
    dren::write_embedding(join_path(dir, "train_embedding.csv"), z, data.y);
    dren::write_scatter_svg(join_path(dir, "train_scatter.svg"), z, data.y,
                            "DREN embedding (" + describe(cfg) + ")", data.names);
    write_manifest(dir, "train", dren::run_config_to_json(cfg), data.inputs,
                   {"train_checkpoint.bin", "train_checkpoint.bin.json", "train_report.json",
                    "train_embedding.csv", "train_scatter.svg"});

    std::cout << "train: best epoch " << result.report.best_epoch << ", validation accuracy "
              << result.report.best_val_accuracy << "\n";
}

int cmd_sweep(const TrainOpts& opts, const std::vector<double>& lambdas,
              const std::vector<std::size_t>& dims, std::size_t folds) {
    const std::string dir = resolve_out_dir(opts.out);
    const LoadedData data = load_data(opts.data, opts.seed);
    const dren::RunConfig base = run_config_from(opts);

    const dren::SweepReport report = dren::sweep(base, lambdas, dims, folds, data.x, data.y);
    dren::write_json(join_path(dir, "sweep_report.json"), dren::sweep_report_to_json(report));
    {
        std::ofstream table(join_path(dir, "sweep_table.txt"), std::ios::binary);
        if (!table) throw dren::IoError("cannot write sweep_table.txt");
        table << dren::sweep_table_text(report);
    }
    json config = dren::run_config_to_json(base);
    config["lambda_grid"] = lambdas;
    config["dim_grid"] = dims;
    config["folds"] = folds;
    write_manifest(dir, "sweep", std::move(config), data.inputs,
                   {"sweep_report.json", "sweep_table.txt"});

    std::cout << dren::sweep_table_text(report);
    bool all_failed = true;
    for (const dren::SweepCell& cell : report.cells) all_failed = all_failed && cell.failed;
    return all_failed ? 1 : 0;
}

json tsne_config_to_json(const dren::TsneConfig& cfg) {
    return json{
        {"perplexity", cfg.perplexity},
        {"iterations", cfg.iterations},
        {"learning_rate", cfg.learning_rate},
        {"initial_momentum", cfg.initial_momentum},
        {"final_momentum", cfg.final_momentum},
        {"momentum_switch_iter", cfg.momentum_switch_iter},
        {"exaggeration", cfg.exaggeration},
        {"exaggeration_iters", cfg.exaggeration_iters},
        {"embed_dim", cfg.embed_dim},
        {"init_std", cfg.init_std},
        {"seed", cfg.seed},
    };
}

void cmd_compare_tsne(const TrainOpts& opts, double test_fraction, std::size_t oos_k,
                      int tsne_iterations, std::size_t knn_k, const std::string& test_features,
                      const std::string& test_labels) {
    const std::string dir = resolve_out_dir(opts.out);
    const dren::RunConfig cfg = run_config_from(opts);

    // Assemble the train/test pair.
    Matrix x_train, x_test;
    std::vector<int> y_train, y_test;
    json inputs;
    std::vector<std::string> names;
    if (!opts.data.synth.empty()) {
        const dren::SynthSpec spec = synth_spec_from(opts.data, opts.seed);
        const dren::SynthResult gen = dren::gen_synthetic(spec);
        const auto test_pc = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(spec.per_class)));
        dren::TrainTestSplit split = dren::split_synth(gen, spec.classes, test_pc);
        x_train = std::move(split.x_train);
        y_train = std::move(split.y_train);
        x_test = std::move(split.x_test);
        y_test = std::move(split.y_test);
        json spec_json = synth_spec_to_json(spec, gen.center_layout);
        spec_json["test_per_class"] = test_pc;
        inputs = json{{"synth", std::move(spec_json)}};
    } else {
        if (opts.data.features.empty() || opts.data.labels.empty() || test_features.empty() ||
            test_labels.empty()) {
            throw dren::InvalidConfigError(
                "compare-tsne needs --synth or all of --features/--labels/--test-features/--test-labels");
        }
        x_train = dren::load_features(opts.data.features);
        y_train = dren::load_labels(opts.data.labels);
        dren::validate_dataset(x_train, y_train);
        x_test = dren::load_features(test_features);
        y_test = dren::load_labels(test_labels);
        if (x_test.rows() != y_test.size()) {
            throw dren::InvalidInputError("test feature/label count mismatch");
        }
        inputs = json{{"files",
                       json{{"features", dren::file_hash_hex(opts.data.features)},
                            {"labels", dren::file_hash_hex(opts.data.labels)},
                            {"test_features", dren::file_hash_hex(test_features)},
                            {"test_labels", dren::file_hash_hex(test_labels)}}}};
        if (!opts.data.names.empty()) names = dren::load_name_map(opts.data.names);
    }

    // (a) DREN: joint training, then test embedding by plain forward pass --
    // no out-of-sample machinery on this path.
    dren::TrainResult dren_run = dren::train(cfg, x_train, y_train);
    const Matrix z_train_dren = dren::forward(dren_run.params, x_train).z;
    const Matrix z_test_dren = dren::forward(dren_run.params, x_test).z;

    // (b) classical t-SNE on train features + LLE-style OOS for the test set.
    dren::TsneConfig tsne_cfg;
    tsne_cfg.perplexity = cfg.perplexity;
    tsne_cfg.embed_dim = cfg.embed_dim;
    tsne_cfg.iterations = tsne_iterations;
    tsne_cfg.seed = cfg.seed;
    const dren::TsneResult tsne_run = dren::tsne_fit(x_train, tsne_cfg);
    const dren::OosWeights oos = dren::lle_weights_batch(x_test, x_train, oos_k);
    const Matrix z_test_tsne = dren::oos_embed(oos, tsne_run.embedding);

    dren::MetricsRecord dren_metrics =
        dren::accuracy(dren::knn_predict(z_train_dren, y_train, z_test_dren, knn_k), y_test);
    dren_metrics.config_hash = dren::config_hash(cfg);
    dren::MetricsRecord tsne_metrics =
        dren::accuracy(dren::knn_predict(tsne_run.embedding, y_train, z_test_tsne, knn_k), y_test);
    tsne_metrics.config_hash = dren::hash_hex(dren::fnv1a64(tsne_config_to_json(tsne_cfg).dump()));

    dren::write_json(join_path(dir, "compare_report.json"),
                     json{{"knn_k", knn_k},
                          {"dren",
                           json{{"test_accuracy", dren_metrics.overall_accuracy},
                                {"test_metrics", dren::metrics_to_json(dren_metrics)},
                                {"train_report", dren::train_report_to_json(dren_run.report)}}},
                          {"tsne",
                           json{{"test_accuracy", tsne_metrics.overall_accuracy},
                                {"test_metrics", dren::metrics_to_json(tsne_metrics)},
                                {"initial_kl", tsne_run.initial_kl},
                                {"final_kl", tsne_run.final_kl},
                                {"oos_k", oos_k}}}});

    // Twin figures over train+test points.
    auto stack = [](const Matrix& a, const Matrix& b) {
        Matrix out(a.rows() + b.rows(), a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) out(a.rows() + i, j) = b(i, j);
        return out;
    };
    std::vector<int> y_all = y_train;
    y_all.insert(y_all.end(), y_test.begin(), y_test.end());
    dren::write_scatter_svg(join_path(dir, "compare_dren.svg"),
                            stack(z_train_dren, z_test_dren), y_all,
                            "DREN train+test (" + describe(cfg) + ")", names);
    dren::write_scatter_svg(join_path(dir, "compare_tsne.svg"),
                            stack(tsne_run.embedding, z_test_tsne), y_all,
                            "t-SNE train + OOS test", names);

    json config{{"run", dren::run_config_to_json(cfg)},
                {"tsne", tsne_config_to_json(tsne_cfg)},
                {"oos_k", oos_k},
                {"knn_k", knn_k},
                {"test_fraction", test_fraction}};
    write_manifest(dir, "compare-tsne", std::move(config), std::move(inputs),
                   {"compare_report.json", "compare_dren.svg", "compare_tsne.svg"});

    std::cout << "compare-tsne: DREN " << knn_k << "-NN test accuracy "
              << dren_metrics.overall_accuracy << ", t-SNE+OOS " << tsne_metrics.overall_accuracy
              << "\n";
}

void cmd_tsne(const DataOpts& data_opts, dren::TsneConfig tsne_cfg, const std::string& out) {
    const std::string dir = resolve_out_dir(out);
    const LoadedData data = load_data(data_opts, tsne_cfg.seed);

    const dren::TsneResult result = dren::tsne_fit(data.x, tsne_cfg);
    dren::write_embedding(join_path(dir, "tsne_embedding.csv"), result.embedding, data.y);
    dren::write_scatter_svg(join_path(dir, "tsne_scatter.svg"), result.embedding, data.y,
                            "t-SNE embedding", data.names);
    dren::write_json(join_path(dir, "tsne_report.json"),
                     json{{"initial_kl", result.initial_kl},
                          {"final_kl", result.final_kl},
                          {"unconverged_rows", result.unconverged_rows}});
    write_manifest(dir, "tsne", tsne_config_to_json(tsne_cfg), data.inputs,
                   {"tsne_embedding.csv", "tsne_scatter.svg", "tsne_report.json"});

    std::cout << "tsne: KL " << result.initial_kl << " -> " << result.final_kl << "\n";
}

void cmd_embed_oos(const std::string& train_features, const std::string& train_embedding,
                   const std::string& test_features, const std::string& test_labels,
                   std::size_t k, double epsilon, bool exclude_exact, const std::string& out) {
    const std::string dir = resolve_out_dir(out);
    const Matrix x_train = dren::load_features(train_features);
    const dren::EmbeddingFile emb = dren::load_embedding(train_embedding);
    if (x_train.rows() != emb.z.rows()) {
        throw dren::InvalidInputError("training features and embedding disagree on row count");
    }
    const Matrix x_test = dren::load_features(test_features);
    std::vector<int> labels;
    if (!test_labels.empty()) {
        labels = dren::load_labels(test_labels);
        if (labels.size() != x_test.rows()) {
            throw dren::InvalidInputError("test feature/label count mismatch");
        }
    } else {
        labels.assign(x_test.rows(), -1); // unknown
    }

    const dren::OosWeights weights =
        dren::lle_weights_batch(x_test, x_train, k, epsilon, exclude_exact);
    const Matrix z_test = dren::oos_embed(weights, emb.z);
    dren::write_embedding(join_path(dir, "oos_embedding.csv"), z_test, labels);
    std::vector<std::string> artifacts{"oos_embedding.csv"};
    if (!test_labels.empty()) {
        dren::write_scatter_svg(join_path(dir, "oos_scatter.svg"), z_test, labels,
                                "Out-of-sample embedding (k=" + std::to_string(k) + ")");
        artifacts.push_back("oos_scatter.svg");
    }
    json inputs{{"train_features", dren::file_hash_hex(train_features)},
                {"train_embedding", dren::file_hash_hex(train_embedding)},
                {"test_features", dren::file_hash_hex(test_features)}};
    if (!test_labels.empty()) inputs["test_labels"] = dren::file_hash_hex(test_labels);
    write_manifest(dir, "embed-oos",
                   json{{"k", k}, {"epsilon", epsilon}, {"exclude_exact", exclude_exact}},
                   std::move(inputs), artifacts);

    std::cout << "embed-oos: embedded " << z_test.rows() << " points\n";
}

void cmd_knn_eval(const std::string& train_embedding, const std::string& test_embedding,
                  std::size_t k, const std::string& out) {
    const std::string dir = resolve_out_dir(out);
    const dren::EmbeddingFile train = dren::load_embedding(train_embedding);
    const dren::EmbeddingFile test = dren::load_embedding(test_embedding);

    dren::MetricsRecord metrics =
        dren::accuracy(dren::knn_predict(train.z, train.labels, test.z, k), test.labels);
    metrics.config_hash = dren::hash_hex(dren::fnv1a64("knn_k=" + std::to_string(k)));
    dren::write_json(join_path(dir, "knn_metrics.json"), dren::metrics_to_json(metrics));
    write_manifest(dir, "knn-eval", json{{"k", k}},
                   json{{"train_embedding", dren::file_hash_hex(train_embedding)},
                        {"test_embedding", dren::file_hash_hex(test_embedding)}},
                   {"knn_metrics.json"});

    std::cout << "knn-eval: accuracy " << metrics.overall_accuracy << "\n";
}

void cmd_synth(const DataOpts& data_opts, std::uint64_t seed, const std::string& out) {
    const std::string dir = resolve_out_dir(out);
    DataOpts d = data_opts;
    if (d.synth.empty()) d.synth = "blobs";
    const dren::SynthSpec spec = synth_spec_from(d, seed);
    const dren::SynthResult gen = dren::gen_synthetic(spec);

    dren::write_features(join_path(dir, "synth_features.csv"), gen.x);
    dren::write_labels(join_path(dir, "synth_labels.csv"), gen.labels);
    write_manifest(dir, "synth", synth_spec_to_json(spec, gen.center_layout), json::object(),
                   {"synth_features.csv", "synth_labels.csv"});

    std::cout << "synth: wrote " << gen.x.rows() << " samples ("
              << dren::synth_kind_name(spec.kind) << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint embedding/classifier training with divergence regularization, "
                 "plus a classical t-SNE baseline"};
    app.require_subcommand(1);
    int exit_code = 0;

    TrainOpts train_opts;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model and emit its artifacts");
    add_train_opts(train_cmd, train_opts);
    train_cmd->callback([&] { cmd_train(train_opts); });

    TrainOpts sweep_opts;
    std::vector<double> sweep_lambdas;
    std::vector<std::size_t> sweep_dims;
    std::size_t sweep_folds = 1;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Grid over lambda and embedding dimension");
    add_train_opts(sweep_cmd, sweep_opts, /*with_lambda_dim=*/false);
    sweep_cmd->add_option("--lambdas", sweep_lambdas, "Lambda grid (comma- or space-separated)")
        ->required()
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    sweep_cmd->add_option("--dims", sweep_dims, "Embedding dimension grid")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--folds", sweep_folds, "Independent seeded folds per cell")
        ->check(CLI::PositiveNumber);
    sweep_cmd->callback([&] { exit_code = cmd_sweep(sweep_opts, sweep_lambdas, sweep_dims, sweep_folds); });

    TrainOpts cmp_opts;
    double cmp_test_fraction = 1.0 / 3.0;
    std::size_t cmp_oos_k = 5;
    int cmp_tsne_iterations = 1000;
    std::size_t cmp_knn_k = 3;
    std::string cmp_test_features, cmp_test_labels;
    CLI::App* cmp_cmd = app.add_subcommand(
        "compare-tsne", "Side-by-side DREN vs classical t-SNE + OOS on a train/test pair");
    add_train_opts(cmp_cmd, cmp_opts);
    cmp_cmd->add_option("--test-fraction", cmp_test_fraction,
                        "Held-out test fraction for synthetic data")
        ->check(CLI::Range(0.0, 1.0));
    cmp_cmd->add_option("--test-features", cmp_test_features, "Test feature file");
    cmp_cmd->add_option("--test-labels", cmp_test_labels, "Test label file");
    cmp_cmd->add_option("--oos-k", cmp_oos_k, "OOS neighbor count")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--tsne-iterations", cmp_tsne_iterations, "t-SNE iterations")
        ->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--knn-k", cmp_knn_k, "K for the K-NN evaluation")
        ->check(CLI::PositiveNumber);
    cmp_cmd->callback([&] {
        cmd_compare_tsne(cmp_opts, cmp_test_fraction, cmp_oos_k, cmp_tsne_iterations, cmp_knn_k,
                         cmp_test_features, cmp_test_labels);
    });

    DataOpts tsne_data;
    dren::TsneConfig tsne_cfg;
    std::string tsne_out;
    CLI::App* tsne_cmd = app.add_subcommand("tsne", "Classical t-SNE embedding of a dataset");
    add_data_opts(tsne_cmd, tsne_data);
    tsne_cmd->add_option("--dim", tsne_cfg.embed_dim, "Embedding dimension")
        ->check(CLI::PositiveNumber);
    tsne_cmd->add_option("--perplexity", tsne_cfg.perplexity, "Calibration target")
        ->check(CLI::PositiveNumber);
    tsne_cmd->add_option("--iterations", tsne_cfg.iterations, "Gradient descent iterations")
        ->check(CLI::PositiveNumber);
    tsne_cmd->add_option("--tsne-lr", tsne_cfg.learning_rate, "Learning rate")
        ->check(CLI::PositiveNumber);
    tsne_cmd->add_option("--seed", tsne_cfg.seed, "Run seed");
    tsne_cmd->add_option("--out", tsne_out, "Output directory");
    tsne_cmd->callback([&] { cmd_tsne(tsne_data, tsne_cfg, tsne_out); });

    std::string oos_train_features, oos_train_embedding, oos_test_features, oos_test_labels,
        oos_out;
    std::size_t oos_k = 5;
    double oos_epsilon = 1e-3;
    bool oos_exclude_exact = false;
    CLI::App* oos_cmd = app.add_subcommand(
        "embed-oos", "Project unseen points into an existing embedding (LLE-style)");
    oos_cmd->add_option("--train-features", oos_train_features, "Training feature file")
        ->required();
    oos_cmd->add_option("--train-embedding", oos_train_embedding, "Training embedding file")
        ->required();
    oos_cmd->add_option("--test-features", oos_test_features, "Features to project")->required();
    oos_cmd->add_option("--test-labels", oos_test_labels, "Optional labels for the output file");
    oos_cmd->add_option("--k", oos_k, "Neighbor count")->check(CLI::PositiveNumber);
    oos_cmd->add_option("--epsilon", oos_epsilon, "Gram regularization relative to trace")
        ->check(CLI::PositiveNumber);
    oos_cmd->add_flag("--exclude-exact", oos_exclude_exact,
                      "Skip training rows at distance exactly zero");
    oos_cmd->add_option("--out", oos_out, "Output directory");
    oos_cmd->callback([&] {
        cmd_embed_oos(oos_train_features, oos_train_embedding, oos_test_features, oos_test_labels,
                      oos_k, oos_epsilon, oos_exclude_exact, oos_out);
    });

    std::string knn_train_embedding, knn_test_embedding, knn_out;
    std::size_t knn_k = 3;
    CLI::App* knn_cmd =
        app.add_subcommand("knn-eval", "K-NN accuracy of a test embedding against a training one");
    knn_cmd->add_option("--train-embedding", knn_train_embedding, "Training embedding file")
        ->required();
    knn_cmd->add_option("--test-embedding", knn_test_embedding, "Test embedding file")->required();
    knn_cmd->add_option("--k", knn_k, "Neighbor count")->check(CLI::PositiveNumber);
    knn_cmd->add_option("--out", knn_out, "Output directory");
    knn_cmd->callback([&] { cmd_knn_eval(knn_train_embedding, knn_test_embedding, knn_k, knn_out); });

    DataOpts synth_data;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset to disk");
    add_data_opts(synth_cmd, synth_data);
    synth_cmd->add_option("--seed", synth_seed, "Generator seed");
    synth_cmd->add_option("--out", synth_out, "Output directory");
    synth_cmd->callback([&] { cmd_synth(synth_data, synth_seed, synth_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const dren::DrenError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
