#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "illumine/analytics/grid.hpp"
#include "illumine/core/archive.hpp"
#include "illumine/digit/domain.hpp"
#include "illumine/report/heatmap.hpp"
#include "illumine/road/geometry.hpp"

namespace illumine::report {

/// SVG fragment drawing input `id` inside the square (x, y, size), or
/// nothing when the input cannot be loaded.
using ThumbnailFn = std::function<std::optional<std::string>(std::uint64_t id, double x, double y, double size)>;

inline constexpr int kThumbPx = 56;

/// One thumbnail per occupied cell, laid out on the map grid; misbehaving
/// elites are circled, missing inputs drawn as a crossed placeholder.
inline std::string render_gallery(const analytics::GridMap& m, const ThumbnailFn& thumbnail,
                                  std::vector<std::string>* warnings = nullptr, const std::string& title = {}) {
  int max_x = 0, max_y = 0;
  for (const auto& [c, _] : m.cells) {
    max_x = std::max(max_x, c.at(0));
    max_y = std::max(max_y, c.size() > 1 ? c[1] : 0);
  }
  const int cols = m.grid > 0 ? m.grid : max_x + 1;
  const int rows = m.grid > 0 ? m.grid : max_y + 1;
  const int t = kThumbPx;
  const int width = m.cells.empty() ? 2 * kMarginLeft : kMarginLeft + cols * t + kMarginRight;
  const int height = m.cells.empty() ? kMarginTop + kMarginBottom : kMarginTop + rows * t + kMarginBottom;

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<title>" << xml_escape(title) << "</title>\n";
  if (m.features.size() >= 2) {
    s << "<text x=\"" << kMarginLeft << "\" y=\"" << height - 20 << "\">x: " << xml_escape(m.features[0])
      << "</text>\n<text x=\"" << kMarginLeft + 120 << "\" y=\"" << height - 20 << "\">y: "
      << xml_escape(m.features[1]) << "</text>\n";
  }
  for (const auto& [c, cell] : m.cells) {
    const int cx = c.at(0), cy = c.size() > 1 ? c[1] : 0;
    const double x = kMarginLeft + cx * t, y = kMarginTop + (rows - 1 - cy) * t;
    s << "<g class=\"cell\" data-coords=\"" << cx << ',' << cy << "\" data-elite=\"" << cell.elite_id << "\">\n";
    s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << t << "\" height=\"" << t
      << "\" fill=\"#ffffff\" stroke=\"#bbbbbb\"/>\n";
    auto body = thumbnail ? thumbnail(cell.elite_id, x + 2, y + 2, t - 4) : std::nullopt;
    if (body) {
      s << *body;
    } else {
      s << "<path class=\"placeholder\" d=\"M" << x + 4 << ' ' << y + 4 << "L" << x + t - 4 << ' ' << y + t - 4 << "M"
        << x + t - 4 << ' ' << y + 4 << "L" << x + 4 << ' ' << y + t - 4 << "\" stroke=\"#999999\" fill=\"none\"/>\n";
      if (warnings) warnings->push_back("missing input for elite " + std::to_string(cell.elite_id));
    }
    if (cell.elite_fitness < 0.0)
      s << "<circle class=\"misbehaviour\" cx=\"" << x + t / 2.0 << "\" cy=\"" << y + t / 2.0 << "\" r=\""
        << t / 2.0 - 2 << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

/// Grayscale pixels of a stored raw digit (inputs/<id>.bin).
inline ThumbnailFn digit_thumbnails(std::filesystem::path inputs) {
  return [inputs = std::move(inputs)](std::uint64_t id, double x, double y,
                                      double size) -> std::optional<std::string> {
    const auto path = inputs / (std::to_string(id) + ".bin");
    if (!std::filesystem::exists(path)) return std::nullopt;
    digit::RasterDigit r;
    try {
      r = digit::read_raster(path);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    const double p = size / digit::kSide;
    std::ostringstream s;
    s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"#000000\"/>\n";
    for (int row = 0; row < digit::kSide; ++row)
      for (int col = 0; col < digit::kSide; ++col)
        if (const int v = r.at(row, col); v > 0) {
          char fill[8];
          std::snprintf(fill, sizeof fill, "#%02x%02x%02x", v, v, v);
          s << "<rect x=\"" << svg_coord(x + col * p) << "\" y=\"" << svg_coord(y + row * p) << "\" width=\""
            << svg_coord(p) << "\" height=\"" << svg_coord(p) << "\" fill=\"" << fill << "\"/>\n";
        }
    return s.str();
  };
}

inline std::string polyline_points(const std::vector<road::Vec2>& pts, double x0, double y0, double scale,
                                   road::Vec2 origin, double size) {
  std::ostringstream s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s << ' ';
    s << svg_coord(x0 + (pts[i].x - origin.x) * scale) << ',' << svg_coord(y0 + size - (pts[i].y - origin.y) * scale);
  }
  return s.str();
}

/// Road center line from a stored control-point list (inputs/<id>.json), fitted to the box.
inline ThumbnailFn road_thumbnails(std::filesystem::path inputs, road::GeometryOptions opt = {}) {
  return [inputs = std::move(inputs), opt](std::uint64_t id, double x, double y,
                                           double size) -> std::optional<std::string> {
    const auto path = inputs / (std::to_string(id) + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    road::RoadGeometry geo;
    try {
      geo = road::build_geometry(road::road_from_json(json::parse(read_text(path))), opt);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    road::Vec2 lo = geo.center_line.front(), hi = lo;
    for (auto p : geo.center_line) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1.0});
    const double scale = size / extent;
    std::ostringstream s;
    s << "<polyline points=\"" << polyline_points(geo.center_line, x, y, scale, lo, size)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
    return s.str();
  };
}

/// Stand-alone drawing of a road: lane boundaries, center line and an optional trajectory.
inline std::string road_svg(const road::RoadGeometry& geo, const std::vector<road::Vec2>* trajectory = nullptr,
                            double px_per_m = 3.0) {
  road::Vec2 lo = geo.left_edge.front(), hi = lo;
  for (const auto* line : {&geo.left_edge, &geo.right_edge})
    for (auto p : *line) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  const double margin = 10.0;
  const double w = (hi.x - lo.x) * px_per_m + 2 * margin, h = (hi.y - lo.y) * px_per_m + 2 * margin;
  const double size = (hi.y - lo.y) * px_per_m;
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << svg_coord(w) << "\" height=\""
    << svg_coord(h) << "\">\n";
  auto line = [&](const std::vector<road::Vec2>& pts, const char* cls, const char* style) {
    s << "<polyline class=\"" << cls << "\" points=\"" << polyline_points(pts, margin, margin, px_per_m, lo, size)
      << "\" fill=\"none\" " << style << "/>\n";
  };
  line(geo.left_edge, "edge", "stroke=\"#000000\" stroke-width=\"1\"");
  line(geo.right_edge, "edge", "stroke=\"#000000\" stroke-width=\"1\"");
  line(geo.center_line, "center", "stroke=\"#f2b705\" stroke-width=\"1\" stroke-dasharray=\"4 3\"");
  if (trajectory && !trajectory->empty()) line(*trajectory, "trajectory", "stroke=\"#d62728\" stroke-width=\"1.5\"");
  s << "</svg>\n";
  return s.str();
}

} // namespace illumine::report
