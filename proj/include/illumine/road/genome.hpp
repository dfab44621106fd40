#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/util/hash.hpp"

namespace illumine::road {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Road model: control points of the center-line spline plus lane width.
struct RoadGenome {
  std::vector<Vec2> control_points;
  double lane_width = 4.0;

  friend bool operator==(const RoadGenome&, const RoadGenome&) = default;
};

inline nlohmann::json to_json(const RoadGenome& g) {
  nlohmann::json pts = nlohmann::json::array();
  for (Vec2 p : g.control_points) pts.push_back({p.x, p.y});
  return {{"control_points", std::move(pts)}, {"lane_width", g.lane_width}};
}

inline RoadGenome road_from_json(const nlohmann::json& j) {
  RoadGenome g;
  for (const auto& p : j.at("control_points")) g.control_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  g.lane_width = j.value("lane_width", 4.0);
  return g;
}

inline std::string digest(const RoadGenome& g) {
  Fnv1a h;
  for (Vec2 p : g.control_points) {
    h.update(p.x);
    h.update(p.y);
  }
  h.update(g.lane_width);
  return h.hex();
}

} // namespace illumine::road
