#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "illumine/core/individual.hpp"
#include "illumine/road/features.hpp"
#include "illumine/road/geometry.hpp"
#include "illumine/road/mutate.hpp"
#include "illumine/sut/driver.hpp"
#include "illumine/util/error.hpp"
#include "illumine/util/hash.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::road {

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names{"MinRad", "TurCnt", "DirCov", "StdSA", "MLP"};
  return names;
}

inline double default_scale(const std::string& feature) {
  static const std::map<std::string, double> alpha{
      {"MinRad", 0.2}, {"TurCnt", 1.0}, {"DirCov", 1.0}, {"StdSA", 100.0}, {"MLP", 10.0}};
  const auto it = alpha.find(feature);
  if (it == alpha.end()) throw ConfigError("unknown road feature '" + feature + "'");
  return it->second;
}

inline double compute_feature(const std::string& name, const RoadGeometry& geo, const sut::SimulationTrace& trace) {
  if (name == "MinRad") return feat_min_radius(geo);
  if (name == "TurCnt") return feat_turn_count(geo);
  if (name == "DirCov") return feat_direction_coverage(geo);
  if (name == "StdSA") return sut::feat_std_steering(trace);
  if (name == "MLP") return sut::feat_mean_lateral_position(trace);
  throw ConfigError("unknown road feature '" + name + "'");
}

/// Driving callback: one simulation of `genome` (whose geometry is `geo`) on the given worker.
using DriveFn = std::function<sut::SimulationTrace(const RoadGenome& genome, const RoadGeometry& geo, std::size_t worker)>;

/// The built-in driver; its noise stream is keyed by the road itself so
/// results do not depend on evaluation order or worker assignment.
inline DriveFn builtin_driver(sut::DriverParams params, std::uint64_t noise_seed) {
  return [params, noise_seed](const RoadGenome& g, const RoadGeometry& geo, std::size_t) {
    return sut::drive(geo, params, parse_hex64(digest(g)) ^ noise_seed);
  };
}

class RoadDomain {
public:
  using genome_type = RoadGenome;

  RoadDomain(std::vector<std::string> features, DriveFn drive, SeedOptions seed_opt = {}, GeometryOptions geo_opt = {})
      : features_(std::move(features)), drive_(std::move(drive)), seed_opt_(seed_opt), geo_opt_(geo_opt) {
    for (const auto& f : features_) default_scale(f);
  }

  std::vector<RoadGenome> generate_seeds(std::size_t n, Rng& rng) {
    std::vector<RoadGenome> seeds;
    seeds.reserve(n);
    for (std::size_t i = 0; i < n; ++i) seeds.push_back(generate_road_seed(rng, seed_opt_, geo_opt_));
    return seeds;
  }

  RoadGenome mutate(const RoadGenome& g, double lb, double ub, Rng& rng) { return mutate_road(g, lb, ub, rng, geo_opt_); }

  Evaluation evaluate(const RoadGenome& g, std::size_t worker) {
    const RoadGeometry geo = build_geometry(g, geo_opt_);
    const sut::SimulationTrace trace = drive_(g, geo, worker);
    if (trace.steps() == 0) throw SutError("driver produced an empty trace");
    Evaluation ev;
    ev.features.reserve(features_.size());
    for (const auto& f : features_) ev.features.push_back(compute_feature(f, geo, trace));
    ev.fitness = sut::fitness_driving(trace, g.lane_width);
    ev.input_digest = digest(g);
    return ev;
  }

  const std::vector<std::string>& features() const { return features_; }
  const GeometryOptions& geometry_options() const { return geo_opt_; }

private:
  std::vector<std::string> features_;
  DriveFn drive_;
  SeedOptions seed_opt_;
  GeometryOptions geo_opt_;
};

/// Writes the control-point list as JSON.
inline void write_road(const RoadGenome& g, const std::filesystem::path& stem) {
  auto path = stem;
  path += ".json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(g).dump() << '\n';
}

} // namespace illumine::road
