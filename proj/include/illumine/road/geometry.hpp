#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "illumine/road/genome.hpp"

namespace illumine::road {

struct GeometryOptions {
  int samples_per_segment = 20;
  double max_sample_spacing = 1.0; ///< m; segments are resampled finer until met
  double waypoint_spacing = 1.0;   ///< m between waypoints used by structural metrics
  double box_size = 250.0;         ///< edge of the square bounding box centered on the origin
  double knot_exponent = 0.5;      ///< 0 uniform, 0.5 centripetal, 1 chordal
};

/// Which validity constraint a road breaks.
enum class Constraint {
  DistinctEndpoints = 1,
  InsideBoundingBox = 2,
  NoSelfIntersection = 3,
};

struct Violation {
  Constraint constraint;
  std::string message;
};

class InvalidRoad : public std::runtime_error {
public:
  explicit InvalidRoad(Violation v) : std::runtime_error(v.message), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

private:
  Violation violation_;
};

/// Catmull-Rom value on the span p1..p2 via the Barry-Goldman pyramid.
///
/// `u` in [0, 1] runs across the middle span. Knot spacing is
/// |p_{i+1} - p_i|^exponent; coincident points get unit spacing so
/// duplicated end points stay well defined.
inline Vec2 barry_goldman(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double u, double exponent = 0.5) {
  auto knot = [exponent](Vec2 a, Vec2 b) {
    const double d = norm(b - a);
    return d > 0.0 ? std::pow(d, exponent) : 1.0;
  };
  const double t0 = 0.0;
  const double t1 = t0 + knot(p0, p1);
  const double t2 = t1 + knot(p1, p2);
  const double t3 = t2 + knot(p2, p3);
  const double t = t1 + std::clamp(u, 0.0, 1.0) * (t2 - t1);

  auto lerp = [](Vec2 a, Vec2 b, double ta, double tb, double tt) {
    return a * ((tb - tt) / (tb - ta)) + b * ((tt - ta) / (tb - ta));
  };
  const Vec2 a1 = lerp(p0, p1, t0, t1, t);
  const Vec2 a2 = lerp(p1, p2, t1, t2, t);
  const Vec2 a3 = lerp(p2, p3, t2, t3, t);
  const Vec2 b1 = lerp(a1, a2, t0, t2, t);
  const Vec2 b2 = lerp(a2, a3, t1, t3, t);
  return lerp(b1, b2, t1, t2, t);
}

inline double heading_of(Vec2 from, Vec2 to) { return std::atan2(to.y - from.y, to.x - from.x); }

/// Signed offset of a polyline along its left normal (negative = right).
inline std::vector<Vec2> offset_polyline(const std::vector<Vec2>& line, const std::vector<double>& headings,
                                         double offset) {
  std::vector<Vec2> out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    const Vec2 left{-std::sin(headings[i]), std::cos(headings[i])};
    out.push_back(line[i] + left * offset);
  }
  return out;
}

/// Headings by finite differences: central inside, one-sided at the ends.
inline std::vector<double> polyline_headings(const std::vector<Vec2>& pts) {
  std::vector<double> h(pts.size(), 0.0);
  if (pts.size() < 2) return h;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 < pts.size() ? i + 1 : i;
    h[i] = heading_of(pts[a], pts[b]);
  }
  return h;
}

inline std::vector<double> cumulative_length(const std::vector<Vec2>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + norm(pts[i] - pts[i - 1]);
  return s;
}

/// Points at fixed arc-length spacing along a polyline (both ends kept).
inline std::vector<Vec2> resample(const std::vector<Vec2>& pts, double spacing) {
  std::vector<Vec2> out;
  if (pts.empty()) return out;
  out.push_back(pts.front());
  const std::vector<double> s = cumulative_length(pts);
  const double total = s.back();
  std::size_t seg = 0;
  for (double at = spacing; at < total - 1e-9; at += spacing) {
    while (seg + 1 < pts.size() && s[seg + 1] < at) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double f = len > 0.0 ? (at - s[seg]) / len : 0.0;
    out.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * f);
  }
  if (pts.size() > 1) out.push_back(pts.back());
  return out;
}

/// Sampled road: center line, headings, lane lines and arc length.
///
/// Two lanes of width w share the center line; the car keeps the right
/// lane, whose center is offset w/2 to the right.
struct RoadGeometry {
  std::vector<Vec2> center_line;
  std::vector<double> headings;
  std::vector<double> arc_length;
  std::vector<Vec2> right_lane_center;
  std::vector<Vec2> left_edge;
  std::vector<Vec2> right_edge;
  std::vector<Vec2> waypoints;
  std::vector<std::size_t> knot_samples; ///< sample index of each control point
  double lane_width = 4.0;

  double length() const { return arc_length.empty() ? 0.0 : arc_length.back(); }
};

/// Catmull-Rom center line through all control points (end points duplicated).
inline std::vector<Vec2> sample_center_line(const RoadGenome& g, const GeometryOptions& opt,
                                            std::vector<std::size_t>* knots = nullptr) {
  const auto& cp = g.control_points;
  std::vector<Vec2> line;
  if (knots) knots->clear();
  if (cp.size() < 2) return cp;
  for (std::size_t i = 0; i + 1 < cp.size(); ++i) {
    const Vec2 p0 = i == 0 ? cp[0] : cp[i - 1];
    const Vec2 p1 = cp[i], p2 = cp[i + 1];
    const Vec2 p3 = i + 2 < cp.size() ? cp[i + 2] : cp[i + 1];
    int n = std::max(1, opt.samples_per_segment);
    std::vector<Vec2> span;
    for (int attempt = 0; attempt < 12; ++attempt) {
      span.clear();
      double widest = 0.0;
      Vec2 prev = p1;
      for (int k = 0; k <= n; ++k) {
        const Vec2 q = barry_goldman(p0, p1, p2, p3, static_cast<double>(k) / n, opt.knot_exponent);
        if (k > 0) widest = std::max(widest, norm(q - prev));
        span.push_back(q);
        prev = q;
      }
      if (widest <= opt.max_sample_spacing) break;
      n *= 2;
    }
    // cp[i] is the previous span's last sample (or the very first one)
    if (knots) knots->push_back(i == 0 ? 0 : line.size() - 1);
    line.insert(line.end(), span.begin() + (i == 0 ? 0 : 1), span.end());
  }
  if (knots) knots->push_back(line.size() - 1);
  return line;
}

namespace geometry_detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

} // namespace geometry_detail

/// Closed-segment intersection test (touching counts).
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  using namespace geometry_detail;
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

/// True if two non-adjacent segments of the polyline intersect.
///
/// Sort-and-sweep along x: segments are visited by their left end and only
/// pairs whose x-extents overlap are tested.
inline bool self_intersects(const std::vector<Vec2>& line) {
  const std::size_t m = line.size() < 2 ? 0 : line.size() - 1;
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  auto lo = [&](std::size_t i) { return std::min(line[i].x, line[i + 1].x); };
  auto hi = [&](std::size_t i) { return std::max(line[i].x, line[i + 1].x); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo(a) < lo(b); });
  std::vector<std::size_t> active;
  for (std::size_t i : order) {
    const double x = lo(i);
    std::erase_if(active, [&](std::size_t j) { return hi(j) < x; });
    for (std::size_t j : active) {
      const std::size_t a = std::min(i, j), b = std::max(i, j);
      if (b == a + 1) continue; // neighbours share a vertex
      if (segments_intersect(line[a], line[a + 1], line[b], line[b + 1])) return true;
    }
    active.push_back(i);
  }
  return false;
}

/// Checks the three road constraints on the sampled center line.
inline std::optional<Violation> validate_road(const RoadGenome& g, const GeometryOptions& opt = {}) {
  if (g.control_points.size() < 4) return Violation{Constraint::DistinctEndpoints, "road needs at least 4 control points"};
  if (!(g.lane_width > 0.0)) return Violation{Constraint::DistinctEndpoints, "lane width must be positive"};
  if (norm(g.control_points.front() - g.control_points.back()) <= 1e-9)
    return Violation{Constraint::DistinctEndpoints, "start and end point coincide (constraint 1)"};
  const std::vector<Vec2> line = sample_center_line(g, opt);
  const double half = opt.box_size / 2.0;
  for (Vec2 p : line)
    if (!(std::abs(p.x) <= half && std::abs(p.y) <= half))
      return Violation{Constraint::InsideBoundingBox, "road leaves the bounding box (constraint 2)"};
  if (self_intersects(line)) return Violation{Constraint::NoSelfIntersection, "self-intersection (constraint 3)"};
  return std::nullopt;
}

/// Samples a road from its waypoints directly (analytic test roads).
inline RoadGeometry geometry_from_polyline(std::vector<Vec2> line, double lane_width = 4.0,
                                           double waypoint_spacing = 0.0) {
  RoadGeometry geo;
  geo.lane_width = lane_width;
  geo.center_line = std::move(line);
  geo.headings = polyline_headings(geo.center_line);
  geo.arc_length = cumulative_length(geo.center_line);
  geo.right_lane_center = offset_polyline(geo.center_line, geo.headings, -lane_width / 2.0);
  geo.left_edge = offset_polyline(geo.center_line, geo.headings, lane_width);
  geo.right_edge = offset_polyline(geo.center_line, geo.headings, -lane_width);
  geo.waypoints = waypoint_spacing > 0.0 ? resample(geo.center_line, waypoint_spacing) : geo.center_line;
  return geo;
}

inline RoadGeometry build_geometry(const RoadGenome& g, const GeometryOptions& opt = {}) {
  if (auto v = validate_road(g, opt)) throw InvalidRoad(*v);
  std::vector<std::size_t> knots;
  std::vector<Vec2> line = sample_center_line(g, opt, &knots);
  RoadGeometry geo = geometry_from_polyline(std::move(line), g.lane_width, opt.waypoint_spacing);
  geo.knot_samples = std::move(knots);
  return geo;
}

} // namespace illumine::road
