#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace illumine::digit {

inline constexpr int kSide = 28;
inline constexpr double kCanvas = 28.0;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Cubic Bézier: start anchor, two control points, end anchor.
struct CubicSegment {
  Point p0, c1, c2, p1;

  Point at(double t) const {
    const double u = 1.0 - t;
    const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
    return {b0 * p0.x + b1 * c1.x + b2 * c2.x + b3 * p1.x, b0 * p0.y + b1 * c1.y + b2 * c2.y + b3 * p1.y};
  }

  friend bool operator==(const CubicSegment&, const CubicSegment&) = default;
};

/// Closed chain of segments; segment i ends where segment i+1 starts and the
/// last ends where the first starts.
using SubPath = std::vector<CubicSegment>;

struct DigitGenome {
  int expected_label = 0;
  std::vector<SubPath> paths;

  friend bool operator==(const DigitGenome&, const DigitGenome&) = default;
};

inline bool in_canvas(Point p) { return p.x >= 0.0 && p.x <= kCanvas && p.y >= 0.0 && p.y <= kCanvas; }

/// Empty string when valid, otherwise the first problem found.
inline std::string check_genome(const DigitGenome& g) {
  if (g.expected_label < 0 || g.expected_label > 9) return "expected label outside 0-9";
  for (std::size_t p = 0; p < g.paths.size(); ++p) {
    const SubPath& sp = g.paths[p];
    if (sp.empty()) return "subpath " + std::to_string(p) + " is empty";
    for (std::size_t s = 0; s < sp.size(); ++s) {
      const CubicSegment& seg = sp[s];
      for (Point q : {seg.p0, seg.c1, seg.c2, seg.p1})
        if (!in_canvas(q)) return "subpath " + std::to_string(p) + " leaves the 28x28 canvas";
      const Point next = sp[(s + 1) % sp.size()].p0;
      if (distance(seg.p1, next) > 1e-9) return "subpath " + std::to_string(p) + " is not closed";
    }
  }
  return {};
}

inline nlohmann::json to_json(const DigitGenome& g) {
  nlohmann::json paths = nlohmann::json::array();
  for (const SubPath& sp : g.paths) {
    nlohmann::json segs = nlohmann::json::array();
    for (const CubicSegment& s : sp)
      segs.push_back({{s.p0.x, s.p0.y}, {s.c1.x, s.c1.y}, {s.c2.x, s.c2.y}, {s.p1.x, s.p1.y}});
    paths.push_back(std::move(segs));
  }
  return {{"expected_label", g.expected_label}, {"paths", std::move(paths)}};
}

inline DigitGenome genome_from_json(const nlohmann::json& j) {
  DigitGenome g;
  g.expected_label = j.at("expected_label").get<int>();
  for (const auto& segs : j.at("paths")) {
    SubPath sp;
    for (const auto& s : segs) {
      auto pt = [&](std::size_t i) { return Point{s.at(i).at(0).get<double>(), s.at(i).at(1).get<double>()}; };
      sp.push_back({pt(0), pt(1), pt(2), pt(3)});
    }
    g.paths.push_back(std::move(sp));
  }
  return g;
}

namespace detail {
inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}
} // namespace detail

/// SVG path data ("M ... C ... Z" per subpath).
inline std::string svg_path_data(const DigitGenome& g) {
  using detail::fmt_num;
  std::string d;
  for (const SubPath& sp : g.paths) {
    if (sp.empty()) continue;
    d += "M" + fmt_num(sp.front().p0.x) + " " + fmt_num(sp.front().p0.y);
    for (const CubicSegment& s : sp) {
      d += "C" + fmt_num(s.c1.x) + " " + fmt_num(s.c1.y) + " " + fmt_num(s.c2.x) + " " + fmt_num(s.c2.y) +
           " " + fmt_num(s.p1.x) + " " + fmt_num(s.p1.y);
    }
    d += "Z";
  }
  return d;
}

/// Standalone SVG document: white shape on black, even-odd fill.
inline std::string to_svg_document(const DigitGenome& g) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"28\" height=\"28\" viewBox=\"0 0 28 28\">"
         "<rect width=\"28\" height=\"28\" fill=\"black\"/>"
         "<path fill=\"white\" fill-rule=\"evenodd\" d=\"" +
         svg_path_data(g) + "\"/></svg>\n";
}

} // namespace illumine::digit
