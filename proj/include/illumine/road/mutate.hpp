#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "illumine/road/geometry.hpp"
#include "illumine/util/error.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::road {

/// Moves one control point (never the fixed start) by +/- Uniform[lb, ub]
/// per axis; invalid candidates are redrawn up to `max_attempts` times.
inline RoadGenome mutate_road(const RoadGenome& parent, double lb, double ub, Rng& rng,
                              const GeometryOptions& opt = {}, int max_attempts = 50) {
  if (!(lb > 0.0 && lb < ub)) throw std::invalid_argument("mutate_road: need 0 < lb < ub");
  const std::size_t n = parent.control_points.size();
  if (n < 2) throw MutationExhausted("mutate_road: nothing to mutate");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::size_t index = 1 + rng.below(n - 1);
    const double dx = rng.uniform(lb, ub) * (rng.coin() ? 1.0 : -1.0);
    const double dy = rng.uniform(lb, ub) * (rng.coin() ? 1.0 : -1.0);
    RoadGenome child = parent;
    child.control_points[index] = child.control_points[index] + Vec2{dx, dy};
    if (validate_road(child, opt)) continue;
    return child;
  }
  throw MutationExhausted("mutate_road: no valid mutant after " + std::to_string(max_attempts) + " attempts");
}

struct SeedOptions {
  std::size_t control_points = 10;
  double step = 25.0;           ///< m between consecutive control points
  double max_turn_deg = 45.0;   ///< heading change per step drawn from +/- this
  double lane_width = 4.0;
  int max_attempts = 10000;
};

/// Random valid road starting at the origin.
inline RoadGenome generate_road_seed(Rng& rng, const SeedOptions& seed = {}, const GeometryOptions& opt = {}) {
  const double max_turn = seed.max_turn_deg * std::numbers::pi / 180.0;
  for (int attempt = 0; attempt < seed.max_attempts; ++attempt) {
    RoadGenome g;
    g.lane_width = seed.lane_width;
    g.control_points.push_back({0.0, 0.0});
    double heading = rng.uniform(0.0, 2 * std::numbers::pi);
    for (std::size_t i = 1; i < seed.control_points; ++i) {
      if (i > 1) heading += rng.uniform(-max_turn, max_turn);
      const Vec2 prev = g.control_points.back();
      g.control_points.push_back({prev.x + seed.step * std::cos(heading), prev.y + seed.step * std::sin(heading)});
    }
    if (!validate_road(g, opt)) return g;
  }
  throw std::runtime_error("could not generate a valid road after " + std::to_string(seed.max_attempts) + " attempts");
}

} // namespace illumine::road
