#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dren/error.hpp"
#include "dren/matrix.hpp"

namespace dren {

/// Fixed 12-color class palette (cycled for label >= 12), identical across
/// runs so figures stay comparable.
inline constexpr std::array<const char*, 12> kClassPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace detail

/// Scatter figure of the first two embedding coordinates (second coordinate 0
/// for 1-D embeddings): exactly one <circle> element per point, colored by
/// class. Legend swatches are <rect> elements so the circle count equals N.
inline std::string scatter_svg(const Matrix& z, const std::vector<int>& labels,
                               const std::string& title,
                               const std::vector<std::string>& class_names = {}) {
    if (z.rows() != labels.size()) {
        throw InvalidInputError("scatter_svg: row/label count mismatch");
    }
    if (z.rows() == 0 || z.cols() == 0) {
        throw InvalidInputError("scatter_svg: empty embedding");
    }
    const double width = 640.0, height = 640.0, pad = 48.0;

    double min_x = z(0, 0), max_x = z(0, 0);
    double min_y = 0.0, max_y = 0.0;
    const bool has_y = z.cols() >= 2;
    if (has_y) { min_y = z(0, 1); max_y = z(0, 1); }
    int max_label = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        min_x = std::min(min_x, z(i, 0));
        max_x = std::max(max_x, z(i, 0));
        if (has_y) {
            min_y = std::min(min_y, z(i, 1));
            max_y = std::max(max_y, z(i, 1));
        }
        max_label = std::max(max_label, labels[i]);
    }
    const double span_x = max_x > min_x ? max_x - min_x : 1.0;
    const double span_y = max_y > min_y ? max_y - min_y : 1.0;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"#ffffff\"/>\n";
    out += "  <text x=\"320\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
           "text-anchor=\"middle\">" + detail::xml_escape(title) + "</text>\n";
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double px = pad + (z(i, 0) - min_x) / span_x * (width - 2.0 * pad);
        const double yv = has_y ? z(i, 1) : 0.0;
        const double py = height - pad - (yv - min_y) / span_y * (height - 2.0 * pad);
        const char* color = kClassPalette[static_cast<std::size_t>(labels[i]) % kClassPalette.size()];
        out += "  <circle cx=\"" + detail::svg_num(px) + "\" cy=\"" + detail::svg_num(py) +
               "\" r=\"3\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
    }
    for (int c = 0; c <= max_label; ++c) {
        const double ly = 40.0 + 18.0 * static_cast<double>(c);
        const char* color = kClassPalette[static_cast<std::size_t>(c) % kClassPalette.size()];
        std::string name = c < static_cast<int>(class_names.size()) && !class_names[c].empty()
                               ? class_names[static_cast<std::size_t>(c)]
                               : "class " + std::to_string(c);
        out += "  <rect x=\"12\" y=\"" + detail::svg_num(ly - 9.0) +
               "\" width=\"10\" height=\"10\" fill=\"" + std::string(color) + "\"/>\n";
        out += "  <text x=\"26\" y=\"" + detail::svg_num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::xml_escape(name) +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline void write_scatter_svg(const std::string& path, const Matrix& z,
                              const std::vector<int>& labels, const std::string& title,
                              const std::vector<std::string>& class_names = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << scatter_svg(z, labels, title, class_names);
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dren
