#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/road/geometry.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::sut {

using road::Vec2;

/// Built-in lane-keeping agent: pure pursuit on a kinematic bicycle, with
/// steering lag and curvature-proportional steering noise.
struct DriverParams {
  double speed = 6.7;          ///< m/s, about 15 mph
  double dt = 0.1;             ///< s
  double lookahead = 10.0;     ///< m, pure-pursuit lookahead from the rear axle
  double wheelbase = 2.4;      ///< m; center of mass sits half a wheelbase ahead of the rear axle
  double steer_lag = 1.1;      ///< s, first-order steering time constant
  double noise_gain = 0.5;     ///< rad of steering noise sd per 1/m of local curvature
  double max_steer = 0.6;      ///< rad
  double completion_margin = 1.0; ///< m before the end of the lane that counts as done

  friend bool operator==(const DriverParams&, const DriverParams&) = default;
};

inline nlohmann::json to_json(const DriverParams& p) {
  return {{"speed", p.speed},           {"dt", p.dt},
          {"lookahead", p.lookahead},   {"wheelbase", p.wheelbase},
          {"steer_lag", p.steer_lag},   {"noise_gain", p.noise_gain},
          {"max_steer", p.max_steer},   {"completion_margin", p.completion_margin}};
}

inline DriverParams driver_params_from_json(const nlohmann::json& j) {
  DriverParams p;
  p.speed = j.value("speed", p.speed);
  p.dt = j.value("dt", p.dt);
  p.lookahead = j.value("lookahead", p.lookahead);
  p.wheelbase = j.value("wheelbase", p.wheelbase);
  p.steer_lag = j.value("steer_lag", p.steer_lag);
  p.noise_gain = j.value("noise_gain", p.noise_gain);
  p.max_steer = j.value("max_steer", p.max_steer);
  p.completion_margin = j.value("completion_margin", p.completion_margin);
  return p;
}

struct SimulationTrace {
  std::vector<double> steering_angles;   ///< rad, one per step
  std::vector<double> lateral_distances; ///< m, signed, left of the right-lane center is positive
  std::vector<Vec2> positions;           ///< center of mass per step
  bool completed = false;
  double dt = 0.1;

  std::size_t steps() const { return steering_angles.size(); }
};

/// Projection of points onto a polyline, searched near the previous match.
class LaneTracker {
public:
  struct Projection {
    double s = 0.0; ///< arc length of the foot point
    double d = 0.0; ///< signed offset, positive to the left
    std::size_t segment = 0;
  };

  explicit LaneTracker(const std::vector<Vec2>& line) : line_(line), s_(road::cumulative_length(line)) {
    if (line_.size() < 2) throw std::invalid_argument("LaneTracker: lane needs two points");
    const std::size_t n = line_.size();
    curvature_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = road::heading_of(line_[i - 1], line_[i]);
      const double h1 = road::heading_of(line_[i], line_[i + 1]);
      double dh = h1 - h0;
      while (dh > std::numbers::pi) dh -= 2 * std::numbers::pi;
      while (dh <= -std::numbers::pi) dh += 2 * std::numbers::pi;
      const double ds = 0.5 * (s_[i + 1] - s_[i - 1]);
      curvature_[i] = ds > 0 ? dh / ds : 0.0;
    }
  }

  double length() const { return s_.back(); }

  Projection project(Vec2 p, std::size_t hint, std::size_t back = 10, std::size_t ahead = 40) const {
    const std::size_t segments = line_.size() - 1;
    const std::size_t lo = hint > back ? hint - back : 0;
    const std::size_t hi = std::min(segments, hint + ahead);
    Projection best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec2 a = line_[i], b = line_[i + 1];
      const Vec2 ab = b - a;
      const double len2 = road::dot(ab, ab);
      double t = len2 > 0 ? road::dot(p - a, ab) / len2 : 0.0;
      // the ends of the lane extend straight so overshoot is measured sensibly
      if (i != 0) t = std::max(t, 0.0);
      if (i + 1 != segments) t = std::min(t, 1.0);
      const Vec2 foot = a + ab * t;
      const double dist = road::norm(p - foot);
      if (dist < best_dist) {
        best_dist = dist;
        const double len = std::sqrt(len2);
        const double side = road::cross(ab, p - a) >= 0 ? 1.0 : -1.0;
        best = {s_[i] + t * len, side * dist, i};
      }
    }
    return best;
  }

  /// Point at arc length s; beyond the end the last segment is extended.
  Vec2 point_at(double s) const {
    if (s <= 0) return line_.front();
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = it == s_.end() ? line_.size() - 2 : static_cast<std::size_t>(it - s_.begin()) - 1;
    i = std::min(i, line_.size() - 2);
    const double len = s_[i + 1] - s_[i];
    const double t = len > 0 ? (s - s_[i]) / len : 0.0;
    return line_[i] + (line_[i + 1] - line_[i]) * t;
  }

  double curvature_at(std::size_t segment) const {
    return std::max(std::abs(curvature_[segment]), std::abs(curvature_[segment + 1]));
  }

private:
  const std::vector<Vec2>& line_;
  std::vector<double> s_;
  std::vector<double> curvature_;
};

/// Drives the right lane of `geom` until completion, out-of-bound or step limit.
inline SimulationTrace drive(const road::RoadGeometry& geom, const DriverParams& params, std::uint64_t seed) {
  const auto& lane = geom.right_lane_center;
  LaneTracker tracker(lane);
  Rng rng(seed);
  SimulationTrace trace;
  trace.dt = params.dt;

  const double half_base = params.wheelbase / 2.0;
  const double bound = geom.lane_width / 2.0;
  double heading = road::heading_of(lane[0], lane[1]);
  Vec2 rear = lane[0] - Vec2{std::cos(heading), std::sin(heading)} * half_base;
  double steer = 0.0;
  std::size_t hint_com = 0, hint_rear = 0;

  const auto max_steps = static_cast<std::size_t>(std::ceil(tracker.length() / (params.speed * params.dt))) * 3 + 50;
  const double lag = std::min(1.0, params.dt / params.steer_lag);

  for (std::size_t step = 0; step < max_steps; ++step) {
    const Vec2 dir{std::cos(heading), std::sin(heading)};
    const Vec2 com = rear + dir * half_base;
    const auto at_com = tracker.project(com, hint_com);
    hint_com = at_com.segment;

    // pure pursuit toward the lane point one lookahead ahead of the rear axle
    const auto at_rear = tracker.project(rear, hint_rear);
    hint_rear = at_rear.segment;
    const Vec2 target = tracker.point_at(at_rear.s + params.lookahead);
    const Vec2 to_target = target - rear;
    const double alpha = std::atan2(road::cross(dir, to_target), road::dot(dir, to_target));
    const double reach = std::max(road::norm(to_target), 1e-6);
    double command = std::atan(2.0 * params.wheelbase * std::sin(alpha) / reach);
    command += rng.normal(0.0, params.noise_gain * tracker.curvature_at(at_com.segment));
    steer += (command - steer) * lag;
    steer = std::clamp(steer, -params.max_steer, params.max_steer);

    trace.steering_angles.push_back(steer);
    trace.lateral_distances.push_back(at_com.d);
    trace.positions.push_back(com);
    if (std::abs(at_com.d) > bound) break;
    if (at_com.s >= tracker.length() - params.completion_margin) {
      trace.completed = true;
      break;
    }

    rear = rear + dir * (params.speed * params.dt);
    heading += params.speed / params.wheelbase * std::tan(steer) * params.dt;
  }
  return trace;
}

/// min over steps of (w/2 - |d|); negative iff the car left its lane.
inline double fitness_driving(const SimulationTrace& trace, double lane_width) {
  if (trace.lateral_distances.empty()) throw std::invalid_argument("fitness_driving: empty trace");
  double worst = std::numeric_limits<double>::infinity();
  for (double d : trace.lateral_distances) worst = std::min(worst, lane_width / 2.0 - std::abs(d));
  return worst;
}

/// StdSA: population standard deviation of the steering angles (Welford).
inline double feat_std_steering(const SimulationTrace& trace) {
  if (trace.steering_angles.empty()) throw std::invalid_argument("feat_std_steering: empty trace");
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double a : trace.steering_angles) {
    ++n;
    const double delta = a - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (a - mean);
  }
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
}

/// MLP: mean |d| over the trace.
inline double feat_mean_lateral_position(const SimulationTrace& trace) {
  if (trace.lateral_distances.empty()) throw std::invalid_argument("feat_mean_lateral_position: empty trace");
  double sum = 0.0;
  for (double d : trace.lateral_distances) sum += std::abs(d);
  return sum / static_cast<double>(trace.lateral_distances.size());
}

} // namespace illumine::sut
