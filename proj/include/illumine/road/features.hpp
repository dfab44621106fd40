#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <set>
#include <vector>

#include "illumine/road/geometry.hpp"

namespace illumine::road {

inline constexpr double kMinRadiusCap = 200.0;
inline constexpr double kTurnThresholdDeg = 5.0;
inline constexpr int kDirectionSectors = 36;

/// Circumradius of a triangle, infinity when collinear.
inline double circumradius(Vec2 a, Vec2 b, Vec2 c) {
  const double ab = norm(b - a), bc = norm(c - b), ca = norm(a - c);
  const double twice_area = std::abs(cross(b - a, c - a));
  if (twice_area <= 1e-12 * ab * bc) return std::numeric_limits<double>::infinity();
  return ab * bc * ca / (2.0 * twice_area);
}

/// MinRad over consecutive waypoint triplets, capped.
inline double feat_min_radius(const std::vector<Vec2>& waypoints, double cap = kMinRadiusCap) {
  double best = cap;
  for (std::size_t i = 0; i + 2 < waypoints.size(); ++i)
    best = std::min(best, circumradius(waypoints[i], waypoints[i + 1], waypoints[i + 2]));
  return best;
}

inline double feat_min_radius(const RoadGeometry& g, double cap = kMinRadiusCap) {
  return feat_min_radius(g.waypoints, cap);
}

inline double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
  return a;
}

/// TurCnt: runs of same-signed direction changes above 5 degrees; each run is one turn.
inline int feat_turn_count(const std::vector<Vec2>& waypoints, double threshold_deg = kTurnThresholdDeg) {
  const double threshold = threshold_deg * std::numbers::pi / 180.0;
  int turns = 0;
  int run_sign = 0;
  for (std::size_t i = 0; i + 2 < waypoints.size(); ++i) {
    const double change = wrap_angle(heading_of(waypoints[i + 1], waypoints[i + 2]) -
                                     heading_of(waypoints[i], waypoints[i + 1]));
    const int sign = std::abs(change) > threshold ? (change > 0 ? 1 : -1) : 0;
    if (sign != 0 && sign != run_sign) ++turns;
    run_sign = sign;
  }
  return turns;
}

inline int feat_turn_count(const RoadGeometry& g) { return feat_turn_count(g.waypoints); }

/// Sector index of a heading: floor(degrees / 10) mod 36.
inline int direction_sector(double heading_rad) {
  double deg = heading_rad * 180.0 / std::numbers::pi;
  deg = std::fmod(deg, 360.0);
  if (deg < 0) deg += 360.0;
  return static_cast<int>(std::floor(deg / (360.0 / kDirectionSectors))) % kDirectionSectors;
}

/// DirCov: number of 10-degree sectors hit by waypoint segment headings.
inline int feat_direction_coverage(const std::vector<Vec2>& waypoints) {
  std::set<int> hit;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    hit.insert(direction_sector(heading_of(waypoints[i], waypoints[i + 1])));
  return static_cast<int>(hit.size());
}

inline int feat_direction_coverage(const RoadGeometry& g) { return feat_direction_coverage(g.waypoints); }

} // namespace illumine::road
