#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "illumine/analytics/export.hpp"
#include "illumine/analytics/grid.hpp"
#include "illumine/analytics/metrics.hpp"

namespace illumine::report {

enum class Channel { EliteFitness, Probability, Evaluations };

inline std::string channel_name(Channel c) {
  switch (c) {
  case Channel::EliteFitness: return "fitness";
  case Channel::Probability: return "mp";
  case Channel::Evaluations: return "evals";
  }
  return "?";
}

inline constexpr int kRampSteps = 8;
inline constexpr const char* kBlankFill = "#d9d9d9";

/// Step k of the white-to-dark ramp, k in [0, 7].
inline std::string ramp_color(int step) {
  if (step < 0 || step >= kRampSteps) throw std::out_of_range("ramp step");
  static constexpr std::array<int, 3> light{255, 255, 255}, dark{8, 48, 107};
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) rgb[i] = light[i] + (dark[i] - light[i]) * step / (kRampSteps - 1);
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

/// Quantizes v within [lo, hi]; a degenerate range maps everything to the darkest step.
inline int ramp_step(double v, double lo, double hi) {
  if (!(hi > lo)) return kRampSteps - 1;
  const double t = (v - lo) / (hi - lo);
  return std::clamp(static_cast<int>(std::floor(t * kRampSteps)), 0, kRampSteps - 1);
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Coordinates: two decimals, trailing zeros dropped.
inline std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string out = buf;
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return out == "-0" ? "0" : out;
}

inline std::string xml_escape(const std::string& s) {
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

struct HeatmapSpec {
  Channel channel = Channel::Probability;
  double z = 1.96;
  int cell_px = 16;
  std::string title;
};

inline constexpr int kMarginLeft = 70, kMarginTop = 40, kMarginBottom = 60, kMarginRight = 20;

/// Two-feature heatmap of a rescaled map; x = first feature, y = second (upwards).
inline std::string render_heatmap(const analytics::GridMap& m, const HeatmapSpec& spec) {
  if (m.features.size() != 2) throw std::invalid_argument("heatmap needs a two-feature map");
  if (m.grid < 1 || m.grid > 100) throw std::invalid_argument("heatmap needs a rescaled map with 1-100 bins");
  const int gs = m.grid, px = spec.cell_px;
  const int width = kMarginLeft + gs * px + kMarginRight, height = kMarginTop + gs * px + kMarginBottom;

  auto value_of = [&](const analytics::GridCell& c) -> double {
    switch (spec.channel) {
    case Channel::EliteFitness: return c.elite_fitness;
    case Channel::Probability: return static_cast<double>(c.misbehaving_evals) / static_cast<double>(c.total_evals);
    case Channel::Evaluations: return static_cast<double>(c.total_evals);
    }
    return 0.0;
  };
  double lo = 0.0, hi = 1.0;
  if (spec.channel != Channel::Probability && !m.cells.empty()) {
    lo = hi = value_of(m.cells.begin()->second);
    for (const auto& [_, c] : m.cells) {
      lo = std::min(lo, value_of(c));
      hi = std::max(hi, value_of(c));
    }
  }
  std::set<Coords> highlighted;
  for (const auto& p : analytics::probability_map(m, spec.z))
    if (p.highlighted) highlighted.insert(p.coords);

  auto cell_x = [&](int cx) { return kMarginLeft + cx * px; };
  auto cell_y = [&](int cy) { return kMarginTop + (gs - 1 - cy) * px; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<title>" << xml_escape(spec.title) << "</title>\n";
  s << "<text x=\"" << kMarginLeft << "\" y=\"20\" font-size=\"12\">" << xml_escape(spec.title) << " ["
    << channel_name(spec.channel) << "]</text>\n";

  s << "<g id=\"cells\" stroke=\"#ffffff\" stroke-width=\"0.5\">\n";
  for (int cy = 0; cy < gs; ++cy)
    for (int cx = 0; cx < gs; ++cx) {
      const auto it = m.cells.find({cx, cy});
      s << "<rect x=\"" << cell_x(cx) << "\" y=\"" << cell_y(cy) << "\" width=\"" << px << "\" height=\"" << px << "\"";
      if (it == m.cells.end()) {
        s << " class=\"blank\" fill=\"" << kBlankFill << "\"/>\n";
      } else {
        const double v = value_of(it->second);
        s << " fill=\"" << ramp_color(ramp_step(v, lo, hi)) << "\"><title>(" << cx << ',' << cy << ") "
          << analytics::format_real(v) << "</title></rect>\n";
      }
    }
  s << "</g>\n";

  s << "<g id=\"highlights\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\">\n";
  for (const auto& c : highlighted)
    s << "<rect class=\"highlight\" x=\"" << cell_x(c[0]) << "\" y=\"" << cell_y(c[1]) << "\" width=\"" << px
      << "\" height=\"" << px << "\"/>\n";
  s << "</g>\n";

  // axes: value at bin boundaries 0, GS/2 and GS
  const int plot_bottom = kMarginTop + gs * px;
  s << "<g id=\"axes\" stroke=\"#000000\">\n"
    << "<line x1=\"" << kMarginLeft << "\" y1=\"" << plot_bottom << "\" x2=\"" << kMarginLeft + gs * px << "\" y2=\""
    << plot_bottom << "\"/>\n"
    << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft << "\" y2=\"" << plot_bottom
    << "\"/>\n</g>\n";
  s << "<g id=\"ticks\">\n";
  for (int k : {0, gs / 2, gs}) {
    const double vx = m.lower[0] + (m.upper[0] - m.lower[0]) * k / gs;
    const double vy = m.lower[1] + (m.upper[1] - m.lower[1]) * k / gs;
    s << "<text x=\"" << kMarginLeft + k * px << "\" y=\"" << plot_bottom + 14 << "\" text-anchor=\"middle\">"
      << svg_num(vx) << "</text>\n";
    s << "<text x=\"" << kMarginLeft - 4 << "\" y=\"" << plot_bottom - k * px + 3 << "\" text-anchor=\"end\">"
      << svg_num(vy) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << kMarginLeft + gs * px / 2 << "\" y=\"" << plot_bottom + 34 << "\" text-anchor=\"middle\">"
    << xml_escape(m.features[0]) << "</text>\n";
  s << "<text x=\"14\" y=\"" << kMarginTop + gs * px / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << kMarginTop + gs * px / 2 << ")\">" << xml_escape(m.features[1]) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

/// `<run-id>_<featureX>_<featureY>_<channel>.svg`
inline std::string heatmap_file_name(const std::string& run_id, const analytics::GridMap& m, Channel c) {
  return run_id + "_" + m.features.at(0) + "_" + m.features.at(1) + "_" + channel_name(c) + ".svg";
}

} // namespace illumine::report
