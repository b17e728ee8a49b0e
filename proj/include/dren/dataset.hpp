#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dren/error.hpp"
#include "dren/matrix.hpp"
#include "dren/rng.hpp"

namespace dren {

// ---------------------------------------------------------------------------
// Decimal text primitives. 17 significant digits round-trip any finite double
// exactly; std::to_chars/from_chars keep the format locale-independent.
// ---------------------------------------------------------------------------

inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long long& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line_no,
                                    const std::string& what) {
    throw IoError(path + ":" + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Feature grid: comma-separated decimal text, N rows x D columns, optional
// single header line (detected by a failed numeric parse of the first line).
// ---------------------------------------------------------------------------

inline void write_features(const std::string& path, const Matrix& x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (j) out << ',';
            out << format_double(x(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline Matrix load_features(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    std::vector<std::vector<double>> rows;
    std::size_t cols = 0;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        if (line.empty()) {
            if (li + 1 == lines.size()) break; // trailing newline
            detail::parse_fail(path, li + 1, "empty line inside feature grid");
        }
        const auto fields = detail::split_commas(line);
        std::vector<double> row(fields.size());
        bool ok = true;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (!detail::parse_double(fields[j], row[j])) {
                if (li == 0) { ok = false; break; } // header line
                detail::parse_fail(path, li + 1,
                                   "cannot parse field " + std::to_string(j + 1) + " ('" +
                                       std::string(fields[j]) + "') as a number");
            }
        }
        if (!ok) continue;
        if (cols == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            detail::parse_fail(path, li + 1,
                               "expected " + std::to_string(cols) + " fields, got " +
                                   std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + ": no data rows");
    Matrix x(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) x(i, j) = rows[i][j];
    }
    return x;
}

// ---------------------------------------------------------------------------
// Labels: one integer per line.
// ---------------------------------------------------------------------------

inline void write_labels(const std::string& path, const std::vector<int>& y) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (int v : y) out << v << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<int> load_labels(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    std::vector<int> y;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        if (line.empty()) {
            if (li + 1 == lines.size()) break;
            detail::parse_fail(path, li + 1, "empty line inside label file");
        }
        long long v = 0;
        if (!detail::parse_int(line, v)) {
            detail::parse_fail(path, li + 1, "cannot parse '" + std::string(line) + "' as an integer");
        }
        y.push_back(static_cast<int>(v));
    }
    if (y.empty()) throw IoError(path + ": no labels");
    return y;
}

/// Checks the DatasetFiles invariants: matching row counts and labels forming
/// a contiguous range starting at 0. Returns the class count.
inline std::size_t validate_dataset(const Matrix& x, const std::vector<int>& y) {
    if (x.rows() != y.size()) {
        throw InvalidInputError("feature rows (" + std::to_string(x.rows()) +
                                ") and label count (" + std::to_string(y.size()) +
                                ") differ");
    }
    int max_label = -1;
    for (int v : y) {
        if (v < 0) throw InvalidInputError("negative label " + std::to_string(v));
        max_label = std::max(max_label, v);
    }
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (int v : y) seen[static_cast<std::size_t>(v)] = true;
    for (std::size_t c = 0; c < seen.size(); ++c) {
        if (!seen[c]) {
            throw InvalidInputError("labels are not contiguous: class " + std::to_string(c) +
                                    " is absent");
        }
    }
    return seen.size();
}

// ---------------------------------------------------------------------------
// Embedding file: one row per point, fields id, z_1..z_d, label.
// ---------------------------------------------------------------------------

struct EmbeddingFile {
    std::vector<long long> ids;
    Matrix z;
    std::vector<int> labels;
};

inline void write_embedding(const std::string& path, const Matrix& z,
                            const std::vector<int>& labels) {
    if (z.rows() != labels.size()) {
        throw InvalidInputError("write_embedding: row/label count mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        out << i;
        for (std::size_t j = 0; j < z.cols(); ++j) out << ',' << format_double(z(i, j));
        out << ',' << labels[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline EmbeddingFile load_embedding(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    EmbeddingFile f;
    std::size_t dim = 0;
    std::vector<std::vector<double>> zrows;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        if (line.empty()) {
            if (li + 1 == lines.size()) break;
            detail::parse_fail(path, li + 1, "empty line inside embedding file");
        }
        const auto fields = detail::split_commas(line);
        if (fields.size() < 3) {
            detail::parse_fail(path, li + 1, "need at least id, one coordinate, label");
        }
        long long id = 0, label = 0;
        if (!detail::parse_int(fields.front(), id)) {
            detail::parse_fail(path, li + 1, "bad id field");
        }
        if (!detail::parse_int(fields.back(), label)) {
            detail::parse_fail(path, li + 1, "bad label field");
        }
        std::vector<double> row(fields.size() - 2);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!detail::parse_double(fields[j + 1], row[j])) {
                detail::parse_fail(path, li + 1,
                                   "cannot parse coordinate " + std::to_string(j + 1));
            }
        }
        if (dim == 0) {
            dim = row.size();
        } else if (row.size() != dim) {
            detail::parse_fail(path, li + 1, "inconsistent embedding dimension");
        }
        f.ids.push_back(id);
        f.labels.push_back(static_cast<int>(label));
        zrows.push_back(std::move(row));
    }
    if (zrows.empty()) throw IoError(path + ": no embedding rows");
    f.z = Matrix(zrows.size(), dim);
    for (std::size_t i = 0; i < zrows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) f.z(i, j) = zrows[i][j];
    }
    return f;
}

// ---------------------------------------------------------------------------
// Optional class-name map: lines of "id,name".
// ---------------------------------------------------------------------------

inline std::vector<std::string> load_name_map(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    std::vector<std::pair<long long, std::string>> pairs;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) {
            detail::parse_fail(path, li + 1, "expected 'id,name'");
        }
        long long id = 0;
        if (!detail::parse_int(line.substr(0, comma), id) || id < 0) {
            detail::parse_fail(path, li + 1, "bad class id");
        }
        pairs.emplace_back(id, std::string(detail::trim(line.substr(comma + 1))));
    }
    std::vector<std::string> names;
    for (const auto& [id, name] : pairs) {
        const std::size_t idx = static_cast<std::size_t>(id);
        if (idx >= names.size()) names.resize(idx + 1);
        names[idx] = name;
    }
    return names;
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit hashing for provenance manifests and config hashes.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t h = 0xCBF29CE484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return hash_hex(h);
}

// ---------------------------------------------------------------------------
// Synthetic generators.
// ---------------------------------------------------------------------------

struct SynthSpec {
    enum class Kind { Blobs, Rings, Helix };
    Kind kind = Kind::Blobs;
    std::size_t classes = 3;
    std::size_t dim = 10;       // feature dimension
    std::size_t per_class = 100;
    double separation = 10.0;
    double stddev = 1.0;
    std::uint64_t seed = 0;
};

inline const char* synth_kind_name(SynthSpec::Kind k) {
    switch (k) {
        case SynthSpec::Kind::Blobs: return "blobs";
        case SynthSpec::Kind::Rings: return "rings";
        case SynthSpec::Kind::Helix: return "helix";
    }
    return "?";
}

inline SynthSpec::Kind synth_kind_from_name(const std::string& name) {
    if (name == "blobs") return SynthSpec::Kind::Blobs;
    if (name == "rings") return SynthSpec::Kind::Rings;
    if (name == "helix") return SynthSpec::Kind::Helix;
    throw InvalidConfigError("unknown generator '" + name + "' (expected blobs|rings|helix)");
}

struct SynthResult {
    Matrix x;
    std::vector<int> labels;     // class-major order: all of class 0, then 1, ...
    std::string center_layout;   // blobs only; recorded in the manifest
};

namespace detail {

// Blob centers: `separation` along mutually orthogonal axes while they last
// (C <= D), plus the origin for C = D+1; beyond that, random points on the
// sphere of radius `separation` (recorded in the manifest via the layout tag).
inline Matrix blob_centers(const SynthSpec& spec, SeededRng& rng, std::string& layout) {
    Matrix centers(spec.classes, spec.dim, 0.0);
    if (spec.classes <= spec.dim) {
        for (std::size_t c = 0; c < spec.classes; ++c) centers(c, c) = spec.separation;
        layout = "orthogonal-axes";
    } else if (spec.classes == spec.dim + 1) {
        for (std::size_t c = 0; c + 1 < spec.classes; ++c) centers(c, c) = spec.separation;
        layout = "orthogonal-axes-plus-origin";
    } else {
        for (std::size_t c = 0; c < spec.classes; ++c) {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t j = 0; j < spec.dim; ++j) {
                    centers(c, j) = rng.normal();
                    norm2 += centers(c, j) * centers(c, j);
                }
            } while (norm2 == 0.0);
            const double scale = spec.separation / std::sqrt(norm2);
            for (std::size_t j = 0; j < spec.dim; ++j) centers(c, j) *= scale;
        }
        layout = "random-unit-sphere";
    }
    return centers;
}

} // namespace detail

/// Deterministic synthetic datasets. Sample order is class-major; per sample,
/// any manifold parameter is drawn before the noise vector, so the stream of
/// RNG draws — and therefore the dataset — is fixed by the spec alone.
inline SynthResult gen_synthetic(const SynthSpec& spec) {
    if (spec.classes < 1 || spec.per_class < 1 || spec.dim < 1) {
        throw InvalidConfigError("gen_synthetic: classes, per_class, dim must be >= 1");
    }
    if (!(spec.separation > 0.0) || !(spec.stddev > 0.0)) {
        throw InvalidConfigError("gen_synthetic: separation and std must be > 0");
    }
    if (spec.kind == SynthSpec::Kind::Rings && spec.dim < 2) {
        throw InvalidConfigError("gen_synthetic: rings need dim >= 2");
    }
    if (spec.kind == SynthSpec::Kind::Helix && spec.dim < 3) {
        throw InvalidConfigError("gen_synthetic: helix needs dim >= 3");
    }

    SeededRng rng(spec.seed);
    const std::size_t n = spec.classes * spec.per_class;
    SynthResult out;
    out.x = Matrix(n, spec.dim);
    out.labels.resize(n);

    Matrix centers;
    if (spec.kind == SynthSpec::Kind::Blobs) {
        centers = detail::blob_centers(spec, rng, out.center_layout);
    }

    constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t s = 0; s < spec.per_class; ++s, ++row) {
            double* xr = out.x.row(row);
            out.labels[row] = static_cast<int>(c);
            switch (spec.kind) {
                case SynthSpec::Kind::Blobs: {
                    const double* ctr = centers.row(c);
                    for (std::size_t j = 0; j < spec.dim; ++j) {
                        xr[j] = ctr[j] + spec.stddev * rng.normal();
                    }
                    break;
                }
                case SynthSpec::Kind::Rings: {
                    // Concentric annuli of radius (c+1)*separation in the
                    // first two coordinates, isotropic noise everywhere.
                    const double theta = rng.uniform(0.0, kTwoPi);
                    const double radius = spec.separation * static_cast<double>(c + 1);
                    for (std::size_t j = 0; j < spec.dim; ++j) xr[j] = 0.0;
                    xr[0] = radius * std::cos(theta);
                    xr[1] = radius * std::sin(theta);
                    for (std::size_t j = 0; j < spec.dim; ++j) {
                        xr[j] += spec.stddev * rng.normal();
                    }
                    break;
                }
                case SynthSpec::Kind::Helix: {
                    // One labeled turn per class along a 1-D helix in the
                    // first three coordinates.
                    const double t = kTwoPi * (static_cast<double>(c) + rng.uniform01());
                    for (std::size_t j = 0; j < spec.dim; ++j) xr[j] = 0.0;
                    xr[0] = spec.separation * std::cos(t);
                    xr[1] = spec.separation * std::sin(t);
                    xr[2] = spec.separation * t / kTwoPi;
                    for (std::size_t j = 0; j < spec.dim; ++j) {
                        xr[j] += spec.stddev * rng.normal();
                    }
                    break;
                }
            }
        }
    }
    return out;
}

/// Splits a class-major synthetic dataset into train/test by taking the last
/// `test_per_class` samples of each class as the test set. Samples are iid
/// within a class, so positional splitting is unbiased.
struct TrainTestSplit {
    Matrix x_train;
    std::vector<int> y_train;
    Matrix x_test;
    std::vector<int> y_test;
};

inline TrainTestSplit split_synth(const SynthResult& data, std::size_t classes,
                                  std::size_t test_per_class) {
    const std::size_t per_class = data.labels.size() / classes;
    if (test_per_class >= per_class) {
        throw InvalidConfigError("split_synth: test_per_class must be < per_class");
    }
    const std::size_t train_pc = per_class - test_per_class;
    const std::size_t d = data.x.cols();
    TrainTestSplit split;
    split.x_train = Matrix(classes * train_pc, d);
    split.x_test = Matrix(classes * test_per_class, d);
    std::size_t tr = 0, te = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s) {
            const std::size_t src = c * per_class + s;
            if (s < train_pc) {
                for (std::size_t j = 0; j < d; ++j) split.x_train(tr, j) = data.x(src, j);
                split.y_train.push_back(data.labels[src]);
                ++tr;
            } else {
                for (std::size_t j = 0; j < d; ++j) split.x_test(te, j) = data.x(src, j);
                split.y_test.push_back(data.labels[src]);
                ++te;
            }
        }
    }
    return split;
}

} // namespace dren
