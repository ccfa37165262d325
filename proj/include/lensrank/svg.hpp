#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"

namespace lensrank {

struct Palette {
  std::vector<std::string> colors;

  const std::string& color(std::size_t class_index) const {
    if (colors.empty()) throw internal_error("Palette: no colors");
    return colors[class_index % colors.size()];
  }
};

inline Palette default_palette() {
  return Palette{{"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
                  "#a65628", "#f781bf", "#666666", "#1b9e77", "#d95f02",
                  "#7570b3", "#e7298a"}};
}

namespace detail {

inline std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

}  // namespace detail

// Renders a normalized view as a square scatterplot. Output depends only on
// the view and palette, so repeated calls are byte-identical.
inline std::string render_svg(const View2D& view,
                              const Palette& palette = default_palette()) {
  if (view.degenerate)
    throw error("cannot render degenerate view (" + view.degenerate_reason +
                ")");
  constexpr double size = 800.0;
  constexpr double margin = 40.0;
  constexpr double span = size - 2.0 * margin;
  auto px = [&](double x) { return format_fixed(margin + x * span, 2); };
  auto py = [&](double y) { return format_fixed(size - margin - y * span, 2); };

  std::string svg;
  svg +=
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
      "viewBox=\"0 0 800 800\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" "
         "fill=\"#ffffff\"/>\n";
  svg += "  <rect x=\"40\" y=\"40\" width=\"720\" height=\"720\" "
         "fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "  <text x=\"400\" y=\"792\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" +
         detail::xml_escape(view.axis_labels[0]) + "</text>\n";
  svg += "  <text x=\"16\" y=\"400\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 16 400)\">" +
         detail::xml_escape(view.axis_labels[1]) + "</text>\n";
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto c = static_cast<std::size_t>(view.labels[i]);
    svg += "  <circle cx=\"" + px(view.points[i][0]) + "\" cy=\"" +
           py(view.points[i][1]) + "\" r=\"3\" fill=\"" + palette.color(c) +
           "\"/>\n";
  }
  for (std::size_t c = 0; c < view.class_names.size(); ++c) {
    std::string y = std::to_string(56 + 18 * c);
    svg += "  <rect x=\"650\" y=\"" + std::to_string(48 + 18 * c) +
           "\" width=\"10\" height=\"10\" fill=\"" + palette.color(c) +
           "\"/>\n";
    svg += "  <text x=\"666\" y=\"" + y +
           "\" font-family=\"sans-serif\" font-size=\"12\" "
           "class=\"legend\">" +
           detail::xml_escape(view.class_names[c]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void save_svg(const View2D& view, const std::string& path,
                     const Palette& palette = default_palette()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write SVG file '" + path + "'");
  out << render_svg(view, palette);
  if (!out) throw error("failed writing SVG file '" + path + "'");
}

}  // namespace lensrank
