#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "dren/encoder.hpp"
#include "dren/error.hpp"
#include "dren/report.hpp"

namespace dren {

// Checkpoint layout (all integers and doubles little-endian):
//   bytes 0..7   magic "DRENCKPT"
//   u32          format version (1)
//   u64 x 3      input_dim, embed_dim, classes
//   u8  x 2      histogram flag, hist_concat flag
//   u64          bins
//   u32          tensor count T
//   T x          shape entry: u32 name length, name bytes, u64 rows, u64 cols
//   T x          tensor payload: rows*cols doubles, row-major, declaration order
// Optimizer state is not stored. A JSON sidecar (<path>.json) carries the
// RunConfig that produced the parameters.
inline constexpr char kCheckpointMagic[8] = {'D', 'R', 'E', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

} // namespace detail

inline void save_checkpoint(const std::string& path, const EncoderParams& params,
                            const RunConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write(kCheckpointMagic, 8);
    detail::put_u32(out, kCheckpointVersion);
    detail::put_u64(out, params.cfg.input_dim);
    detail::put_u64(out, params.cfg.embed_dim);
    detail::put_u64(out, params.cfg.classes);
    out.put(params.cfg.histogram ? '\1' : '\0');
    out.put(params.cfg.hist_concat ? '\1' : '\0');
    detail::put_u64(out, params.cfg.bins);

    const auto tensors = tensor_refs(params);
    const auto names = tensor_names(params);
    detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        detail::put_u32(out, static_cast<std::uint32_t>(names[t].size()));
        out.write(names[t].data(), static_cast<std::streamsize>(names[t].size()));
        detail::put_u64(out, tensors[t]->rows());
        detail::put_u64(out, tensors[t]->cols());
    }
    for (const Matrix* t : tensors) {
        for (double v : t->data()) detail::put_f64(out, v);
    }
    if (!out) throw IoError("write failed: " + path);
    out.close();
    write_json(path + ".json", run_config_to_json(cfg));
}

/// Rebuilds the parameters (Adam state zeroed — the optimizer is not part of
/// the format). The shape table must match the layout implied by the header
/// config exactly.
inline EncoderParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || !std::equal(magic, magic + 8, kCheckpointMagic)) {
        throw IoError(path + ": not a checkpoint file (bad magic)");
    }
    const std::uint32_t version = detail::get_u32(in);
    if (version != kCheckpointVersion) {
        throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
    }

    EncoderConfig cfg;
    cfg.input_dim = detail::get_u64(in);
    cfg.embed_dim = detail::get_u64(in);
    cfg.classes = detail::get_u64(in);
    cfg.histogram = in.get() != 0;
    cfg.hist_concat = in.get() != 0;
    cfg.bins = detail::get_u64(in);
    if (!in) throw IoError(path + ": truncated header");

    EncoderParams p;
    p.cfg = cfg;
    if (cfg.histogram) {
        p.hist.bins = cfg.bins;
        p.hist.concat = cfg.hist_concat;
        p.hist.centers = Matrix(1, cfg.bins);
        p.hist.widths = Matrix(1, cfg.bins);
    }
    const std::size_t in_dim = cfg.encoder_input_dim();
    p.w1 = Matrix(in_dim, kHidden1);
    p.b1 = Matrix(1, kHidden1);
    p.w2 = Matrix(kHidden1, kHidden2);
    p.b2 = Matrix(1, kHidden2);
    p.w3 = Matrix(kHidden2, kHidden3);
    p.b3 = Matrix(1, kHidden3);
    p.w4 = Matrix(kHidden3, cfg.embed_dim);
    p.b4 = Matrix(1, cfg.embed_dim);
    p.w_out = Matrix(cfg.embed_dim, cfg.classes);
    p.b_out = Matrix(1, cfg.classes);

    const auto tensors = tensor_refs(p);
    const auto names = tensor_names(p);
    const std::uint32_t count = detail::get_u32(in);
    if (count != tensors.size()) {
        throw IoError(path + ": tensor count " + std::to_string(count) + " does not match layout");
    }
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const std::uint32_t name_len = detail::get_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint64_t rows = detail::get_u64(in);
        const std::uint64_t cols = detail::get_u64(in);
        if (!in) throw IoError(path + ": truncated shape table");
        if (name != names[t] || rows != tensors[t]->rows() || cols != tensors[t]->cols()) {
            throw IoError(path + ": shape table entry '" + name + "' (" + std::to_string(rows) +
                          "x" + std::to_string(cols) + ") does not match expected '" + names[t] +
                          "' (" + std::to_string(tensors[t]->rows()) + "x" +
                          std::to_string(tensors[t]->cols()) + ")");
        }
    }
    for (Matrix* t : tensors) {
        for (double& v : t->data()) v = detail::get_f64(in);
    }
    if (!in) throw IoError(path + ": truncated tensor payload");

    for (Matrix* t : tensors) {
        AdamState s;
        s.m = Matrix(t->rows(), t->cols(), 0.0);
        s.v = Matrix(t->rows(), t->cols(), 0.0);
        p.adam.push_back(std::move(s));
    }
    return p;
}

inline RunConfig load_checkpoint_sidecar(const std::string& checkpoint_path) {
    return run_config_from_json(load_json(checkpoint_path + ".json"));
}

} // namespace dren
