#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snaplab/io.hpp"

namespace snap {

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

// White-to-dark-blue ramp; t in [0, 1].
inline std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r = static_cast<int>(std::lround(255.0 + t * (8.0 - 255.0)));
  int g = static_cast<int>(std::lround(255.0 + t * (48.0 - 255.0)));
  int b = static_cast<int>(std::lround(255.0 + t * (107.0 - 255.0)));
  std::ostringstream out;
  out << "rgb(" << r << "," << g << "," << b << ")";
  return out.str();
}

inline std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace detail

// Standalone SVG heatmap over a row-major grid (index y * width + x) with a
// labeled color scale. Deeper color means a larger value; a single hot cell
// yields exactly one maximal-color cell.
inline std::string render_heatmap_svg(const std::vector<double>& values, int width,
                                      int height, const std::string& title = "") {
  if (width < 1 || height < 1) throw std::invalid_argument("heatmap needs positive dims");
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("heatmap value count does not match width * height");
  double vmin = values[0], vmax = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("heatmap values must be finite");
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double span = vmax - vmin;

  const int cell = std::max(4, 520 / std::max(width, height));
  const int top = 30, left = 10, legend_w = 60;
  const int plot_w = cell * width, plot_h = cell * height;
  const int svg_w = left + plot_w + legend_w + 40, svg_h = top + plot_h + 20;

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_w << "\" height=\""
    << svg_h << "\" viewBox=\"0 0 " << svg_w << " " << svg_h << "\">\n";
  s << "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
    << "<stop offset=\"0\" stop-color=\"" << detail::heat_color(0.0) << "\"/>"
    << "<stop offset=\"1\" stop-color=\"" << detail::heat_color(1.0) << "\"/>"
    << "</linearGradient></defs>\n";
  if (!title.empty())
    s << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">"
      << detail::xml_escape(title) << "</text>\n";

  // Grid cells. Row y = 0 is drawn at the bottom so the figure matches the
  // coordinate convention of the grid env (y grows upward).
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = values[static_cast<std::size_t>(y) * width + x];
      double t = span > 0.0 ? (v - vmin) / span : 0.0;
      s << "<rect x=\"" << left + x * cell << "\" y=\"" << top + (height - 1 - y) * cell
        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
        << detail::heat_color(t) << "\"/>\n";
    }
  }

  // Color scale with value labels.
  const int bar_x = left + plot_w + 20;
  s << "<rect x=\"" << bar_x << "\" y=\"" << top << "\" width=\"16\" height=\"" << plot_h
    << "\" fill=\"url(#scale)\" stroke=\"black\"/>\n";
  s << "<text x=\"" << bar_x + 20 << "\" y=\"" << top + 10 << "\" font-size=\"11\">"
    << detail::fmt(vmax) << "</text>\n";
  s << "<text x=\"" << bar_x + 20 << "\" y=\"" << top + plot_h << "\" font-size=\"11\">"
    << detail::fmt(vmin) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

struct CurveSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> means;
  std::vector<double> std_errors;  // may be empty: no band
};

// Line chart with a shaded mean +- stderr band per series, axes with
// min/max labels and a legend.
inline std::string render_curves_svg(const std::vector<CurveSeries>& series,
                                     const std::string& title = "",
                                     const std::string& x_label = "step",
                                     const std::string& y_label = "return") {
  if (series.empty()) throw std::invalid_argument("curves need >= 1 series");
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& c : series) {
    if (c.xs.empty() || c.xs.size() != c.means.size())
      throw std::invalid_argument("curve series needs matching non-empty xs/means");
    if (!c.std_errors.empty() && c.std_errors.size() != c.xs.size())
      throw std::invalid_argument("curve stderr size mismatch");
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
      double e = c.std_errors.empty() ? 0.0 : c.std_errors[i];
      if (!std::isfinite(c.xs[i]) || !std::isfinite(c.means[i]) || !std::isfinite(e))
        throw std::invalid_argument("curve values must be finite");
      if (first) {
        xmin = xmax = c.xs[i];
        ymin = c.means[i] - e;
        ymax = c.means[i] + e;
        first = false;
      }
      xmin = std::min(xmin, c.xs[i]);
      xmax = std::max(xmax, c.xs[i]);
      ymin = std::min(ymin, c.means[i] - e);
      ymax = std::max(ymax, c.means[i] + e);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const int w = 640, h = 400, left = 60, right = 20, top = 40, bottom = 45;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  if (!title.empty())
    s << "<text x=\"" << left << "\" y=\"22\" font-size=\"14\">" << detail::xml_escape(title)
      << "</text>\n";

  // Axes with min/max tick labels.
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
    << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
    << top + ph << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << left << "\" y=\"" << h - 25 << "\" font-size=\"11\">"
    << detail::fmt(xmin) << "</text>\n";
  s << "<text x=\"" << left + pw - 30 << "\" y=\"" << h - 25 << "\" font-size=\"11\">"
    << detail::fmt(xmax) << "</text>\n";
  s << "<text x=\"5\" y=\"" << top + ph << "\" font-size=\"11\">" << detail::fmt(ymin)
    << "</text>\n";
  s << "<text x=\"5\" y=\"" << top + 10 << "\" font-size=\"11\">" << detail::fmt(ymax)
    << "</text>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\">"
    << detail::xml_escape(x_label) << "</text>\n";
  s << "<text x=\"8\" y=\"" << top - 8 << "\" font-size=\"12\">" << detail::xml_escape(y_label)
    << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& c = series[k];
    const char* color = palette[k % 6];
    if (!c.std_errors.empty()) {
      s << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < c.xs.size(); ++i)
        s << px(c.xs[i]) << "," << py(c.means[i] + c.std_errors[i]) << " ";
      for (std::size_t i = c.xs.size(); i-- > 0;)
        s << px(c.xs[i]) << "," << py(c.means[i] - c.std_errors[i]) << " ";
      s << "\"/>\n";
    }
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.xs.size(); ++i)
      s << px(c.xs[i]) << "," << py(c.means[i]) << " ";
    s << "\"/>\n";
    // Legend entry.
    double ly = top + 14.0 * static_cast<double>(k);
    s << "<rect x=\"" << left + pw - 130 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\""
      << color << "\"/>\n";
    s << "<text x=\"" << left + pw - 115 << "\" y=\"" << ly + 9 << "\" font-size=\"11\">"
      << detail::xml_escape(c.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void emit_heatmap(const std::filesystem::path& path, const std::vector<double>& values,
                         int width, int height, const std::string& title = "") {
  write_file_atomic(path, render_heatmap_svg(values, width, height, title));
}

inline void emit_curves(const std::filesystem::path& path,
                        const std::vector<CurveSeries>& series, const std::string& title = "",
                        const std::string& x_label = "step",
                        const std::string& y_label = "return") {
  write_file_atomic(path, render_curves_svg(series, title, x_label, y_label));
}

}  // namespace snap
