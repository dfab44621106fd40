#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "illumine/core/archive.hpp"
#include "illumine/core/feature_map.hpp"
#include "illumine/core/individual.hpp"
#include "illumine/util/error.hpp"

namespace illumine::analytics {

/// Per-cell summary used by every analysis: elite plus counters.
struct GridCell {
  Coords coords;
  std::uint64_t elite_id = 0;
  double elite_fitness = 0.0;
  std::uint64_t total_evals = 0;
  std::uint64_t misbehaving_evals = 0;
};

/// A feature map reduced to what analytics needs. `grid` is 0 for maps
/// kept in their native (unbounded) coordinates.
struct GridMap {
  std::vector<std::string> features;
  int grid = 0;
  std::vector<double> lower, upper; ///< feature value bounds of the rescaled axes
  std::map<Coords, GridCell> cells;

  std::uint64_t total_evaluations() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : cells) n += c.total_evals;
    return n;
  }
};

inline void add_record(GridMap& map, const EvaluationRecord& r, Coords coords) {
  auto [it, inserted] = map.cells.try_emplace(coords, GridCell{coords, r.id, r.fitness, 0, 0});
  GridCell& c = it->second;
  c.total_evals += 1;
  if (r.misbehaviour()) c.misbehaving_evals += 1;
  if (!inserted && r.fitness < c.elite_fitness) {
    c.elite_id = r.id;
    c.elite_fitness = r.fitness;
  }
}

/// The archive's own map, rebuilt from its log in native coordinates.
inline GridMap native_grid(const LoadedArchive& a) {
  GridMap m;
  m.features = a.features();
  for (const auto& r : a.log) add_record(m, r, r.coords);
  return m;
}

template <MapEntry E, typename IdFn>
GridMap to_grid(const FeatureMap<E>& map, std::vector<std::string> features, IdFn elite_id) {
  GridMap m;
  m.features = std::move(features);
  for (const auto& [coords, cell] : map.cells())
    m.cells.emplace(coords, GridCell{coords, elite_id(cell.elite), cell.elite.fitness(), cell.total_evals,
                                     cell.misbehaving_evals});
  return m;
}

/// Shared linear rescaling: GS bins per feature between lower[i] and upper[i].
struct RescaleSpec {
  int grid = 25;
  std::vector<double> lower, upper;
};

/// floor(GS (f - lo) / (hi - lo)), with f = hi (and anything outside) clamped into [0, GS-1].
inline int rescale_bin(double f, double lo, double hi, int grid) {
  if (!(hi > lo)) throw ConfigError("degenerate feature range");
  const double x = std::floor(grid * (f - lo) / (hi - lo));
  return static_cast<int>(std::clamp(x, 0.0, static_cast<double>(grid - 1)));
}

/// Per-feature min/max over every logged evaluation of every archive.
inline RescaleSpec shared_bounds(std::span<const LoadedArchive> archives, int grid) {
  if (grid < 1) throw ConfigError("grid size must be at least 1");
  if (archives.empty()) throw ConfigError("no archives to rescale");
  const auto features = archives.front().features();
  RescaleSpec spec;
  spec.grid = grid;
  spec.lower.assign(features.size(), std::numeric_limits<double>::infinity());
  spec.upper.assign(features.size(), -std::numeric_limits<double>::infinity());
  for (const auto& a : archives) {
    if (a.features() != features)
      throw ConfigError("archive " + a.dir.string() + " maps different features than " + archives.front().dir.string());
    for (const auto& r : a.log)
      for (std::size_t i = 0; i < features.size(); ++i) {
        spec.lower[i] = std::min(spec.lower[i], r.features.at(i));
        spec.upper[i] = std::max(spec.upper[i], r.features.at(i));
      }
  }
  for (std::size_t i = 0; i < features.size(); ++i)
    if (!(spec.upper[i] > spec.lower[i]))
      throw ConfigError("degenerate feature range for " + features[i]);
  return spec;
}

/// Re-bins every logged evaluation of `a` on the shared grid.
inline GridMap rescale(const LoadedArchive& a, const RescaleSpec& spec) {
  GridMap m;
  m.features = a.features();
  m.grid = spec.grid;
  m.lower = spec.lower;
  m.upper = spec.upper;
  if (spec.lower.size() != m.features.size() || spec.upper.size() != m.features.size())
    throw ConfigError("rescale bounds do not match the archive's features");
  for (const auto& r : a.log) {
    Coords c(m.features.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = rescale_bin(r.features.at(i), spec.lower[i], spec.upper[i], spec.grid);
    add_record(m, r, std::move(c));
  }
  return m;
}

inline std::vector<GridMap> rescale_all(std::span<const LoadedArchive> archives, int grid) {
  const RescaleSpec spec = shared_bounds(archives, grid);
  std::vector<GridMap> out;
  out.reserve(archives.size());
  for (const auto& a : archives) out.push_back(rescale(a, spec));
  return out;
}

/// Sums counters cell by cell; the elite is the lowest fitness (first one on ties).
inline GridMap merge(std::span<const GridMap> maps) {
  if (maps.empty()) return {};
  GridMap out;
  out.features = maps.front().features;
  out.grid = maps.front().grid;
  out.lower = maps.front().lower;
  out.upper = maps.front().upper;
  for (const auto& m : maps) {
    if (m.features != out.features || m.grid != out.grid) throw ConfigError("cannot merge maps over different grids");
    for (const auto& [coords, c] : m.cells) {
      auto [it, inserted] = out.cells.try_emplace(coords, c);
      if (inserted) continue;
      GridCell& o = it->second;
      o.total_evals += c.total_evals;
      o.misbehaving_evals += c.misbehaving_evals;
      if (c.elite_fitness < o.elite_fitness) {
        o.elite_fitness = c.elite_fitness;
        o.elite_id = c.elite_id;
      }
    }
  }
  return out;
}

} // namespace illumine::analytics
