// Self-contained SVG line charts of sup-norm or energy against time.
#ifndef MBPETD_SVG_HPP
#define MBPETD_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbpetd/output.hpp"
#include "mbpetd/stepper.hpp"

namespace mbpetd {

enum class PlotKind { SupNorm, Energy };

struct PlotSeries {
  std::string label;
  TimeSeries series;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
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

inline std::string fmt(double x, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

/// Round tick step covering `span` with about five intervals.
inline double tick_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

/// Chart with axes, ticks, one polyline per series (distinct colour and dash
/// pattern), a legend and, when `beta` is given, a dashed reference line.
inline std::string plot_svg(const std::vector<PlotSeries>& list, PlotKind kind,
                            std::optional<double> beta = std::nullopt) {
  if (list.empty()) throw std::invalid_argument("nothing to plot");
  for (const auto& s : list) {
    if (s.series.empty()) throw std::invalid_argument("series '" + s.label + "' is empty");
  }
  auto value = [kind](const SeriesRecord& r) {
    return kind == PlotKind::SupNorm ? r.sup_norm : r.energy;
  };
  double t0 = list[0].series.front().t, t1 = t0;
  double y0 = value(list[0].series.front()), y1 = y0;
  for (const auto& s : list) {
    for (const auto& r : s.series) {
      t0 = std::min(t0, r.t);
      t1 = std::max(t1, r.t);
      y0 = std::min(y0, value(r));
      y1 = std::max(y1, value(r));
    }
  }
  if (beta) {
    y0 = std::min(y0, *beta);
    y1 = std::max(y1, *beta);
  }
  if (t1 <= t0) t1 = t0 + 1.0;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y1))) {
    const double pad = std::max(1e-3, 0.05 * std::abs(y1));
    y0 -= pad;
    y1 += pad;
  } else {
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
  }
  const double W = 720, H = 440, left = 80, right = 20, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  auto Y = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
  using detail::fmt;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(W, "%.0f") +
         "\" height=\"" + fmt(H, "%.0f") + "\" viewBox=\"0 0 " + fmt(W, "%.0f") + " " +
         fmt(H, "%.0f") + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(left + pw) +
         "\" y2=\"" + fmt(top + ph) + "\"/>\n";
  out += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(top + ph) + "\"/>\n";
  out += "</g>\n<g id=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  const double ts = detail::tick_step(t1 - t0);
  for (double t = std::ceil(t0 / ts) * ts; t <= t1 + 1e-9 * ts; t += ts) {
    out += "<line x1=\"" + fmt(X(t)) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(X(t)) +
           "\" y2=\"" + fmt(top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(X(t)) + "\" y=\"" + fmt(top + ph + 18) +
           "\" text-anchor=\"middle\">" + fmt(t, "%g") + "</text>\n";
  }
  const double ys = detail::tick_step(y1 - y0);
  for (double y = std::ceil(y0 / ys) * ys; y <= y1 + 1e-9 * ys; y += ys) {
    out += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(Y(y)) + "\" x2=\"" + fmt(left) +
           "\" y2=\"" + fmt(Y(y)) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(Y(y) + 4) +
           "\" text-anchor=\"end\">" + fmt(std::abs(y) < 1e-12 * ys ? 0.0 : y, "%g") +
           "</text>\n";
  }
  out += "</g>\n";
  out += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 15) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">t</text>\n";
  out += "<text x=\"18\" y=\"" + fmt(top + ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " +
         fmt(top + ph / 2) + ")\">" +
         (kind == PlotKind::SupNorm ? "sup-norm" : "energy") + "</text>\n";
  if (beta) {
    out += "<line id=\"beta\" x1=\"" + fmt(left) + "\" y1=\"" + fmt(Y(*beta)) + "\" x2=\"" +
           fmt(left + pw) + "\" y2=\"" + fmt(Y(*beta)) +
           "\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
    out += "<text x=\"" + fmt(left + pw - 4) + "\" y=\"" + fmt(Y(*beta) - 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" fill=\"gray\">"
           "beta = " +
           fmt(*beta, "%.4f") + "</text>\n";
  }
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  static const char* dashes[] = {"none", "8,4", "2,3", "10,3,2,3", "4,4"};
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string pts;
    for (const auto& r : list[i].series) {
      pts += fmt(X(r.t)) + "," + fmt(Y(value(r))) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    out += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(colors[i % 5]) +
           "\" stroke-width=\"1.5\" stroke-dasharray=\"" + dashes[i % 5] + "\" points=\"" + pts +
           "\"/>\n";
  }
  out += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    const double ly = top + 12 + 18.0 * static_cast<double>(i);
    out += "<line class=\"legend-entry\" x1=\"" + fmt(left + pw - 170) + "\" y1=\"" + fmt(ly) +
           "\" x2=\"" + fmt(left + pw - 140) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" +
           colors[i % 5] + "\" stroke-width=\"1.5\" stroke-dasharray=\"" + dashes[i % 5] +
           "\"/>\n";
    out += "<text x=\"" + fmt(left + pw - 134) + "\" y=\"" + fmt(ly + 4) + "\">" +
           detail::svg_escape(list[i].label) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

inline void emit_plot_svg(const std::vector<PlotSeries>& list, PlotKind kind,
                          const std::filesystem::path& path,
                          std::optional<double> beta = std::nullopt) {
  write_text_file(path, plot_svg(list, kind, beta));
}

}  // namespace mbpetd

#endif  // MBPETD_SVG_HPP
