#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace cvqkd {

// One plotted series: a polyline by default, markers only when points_only
// is set (used for overlaying measured values on model curves).
struct SvgSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;
  bool points_only = false;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out.push_back(c);
  }
  return out;
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace detail

// Static line plot, entirely self-contained markup, deterministic byte
// output for fixed inputs. Not a plotting library: one axes box, linear
// scales, a fixed palette, a legend.
inline std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel, const std::vector<SvgSeries>& series,
                                 int width = 720, int height = 480) {
  using detail::svg_escape;
  using detail::svg_num;

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!any) {
        xmin = xmax = p[0];
        ymin = ymax = p[1];
        any = true;
      } else {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
      }
    }
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double xpad = 0.05 * (xmax - xmin);
  const double ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  const double ml = 72.0, mr = 24.0, mt = 44.0, mb = 56.0;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  const auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  const auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int kPaletteSize = 8;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + svg_num(width / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         svg_escape(title) + "</text>\n";

  // grid and tick labels, five divisions per axis
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    const double px = sx(fx);
    const double py = sy(fy);
    out += "<line x1=\"" + svg_num(px) + "\" y1=\"" + svg_num(mt) + "\" x2=\"" + svg_num(px) +
           "\" y2=\"" + svg_num(mt + ph) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + svg_num(ml) + "\" y1=\"" + svg_num(py) + "\" x2=\"" + svg_num(ml + pw) +
           "\" y2=\"" + svg_num(py) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + svg_num(px) + "\" y=\"" + svg_num(mt + ph + 18.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::tick_label(fx) + "</text>\n";
    out += "<text x=\"" + svg_num(ml - 6.0) + "\" y=\"" + svg_num(py + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::tick_label(fy) + "</text>\n";
  }
  out += "<rect x=\"" + svg_num(ml) + "\" y=\"" + svg_num(mt) + "\" width=\"" + svg_num(pw) +
         "\" height=\"" + svg_num(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % kPaletteSize];
    const auto& s = series[k];
    if (!s.points_only && s.points.size() > 1) {
      out += "<polyline fill=\"none\" stroke=\"";
      out += color;
      out += "\" stroke-width=\"2\" points=\"";
      for (const auto& p : s.points) out += svg_num(sx(p[0])) + "," + svg_num(sy(p[1])) + " ";
      out += "\"/>\n";
    } else {
      for (const auto& p : s.points) {
        out += "<circle cx=\"" + svg_num(sx(p[0])) + "\" cy=\"" + svg_num(sy(p[1])) +
               "\" r=\"3.5\" fill=\"";
        out += color;
        out += "\"/>\n";
      }
    }
  }

  // legend, top right inside the axes box
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % kPaletteSize];
    const double ly = mt + 16.0 + 16.0 * static_cast<double>(k);
    out += "<rect x=\"" + svg_num(ml + pw - 150.0) + "\" y=\"" + svg_num(ly - 9.0) +
           "\" width=\"10\" height=\"10\" fill=\"";
    out += color;
    out += "\"/>\n";
    out += "<text x=\"" + svg_num(ml + pw - 136.0) + "\" y=\"" + svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + svg_escape(series[k].label) +
           "</text>\n";
  }

  out += "<text x=\"" + svg_num(ml + pw / 2.0) + "\" y=\"" + svg_num(height - 12.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         svg_escape(xlabel) + "</text>\n";
  out += "<text x=\"18\" y=\"" + svg_num(mt + ph / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
         svg_num(mt + ph / 2.0) + ")\">" + svg_escape(ylabel) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace cvqkd
