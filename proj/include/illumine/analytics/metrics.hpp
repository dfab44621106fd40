#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "illumine/analytics/grid.hpp"
#include "illumine/core/feature_map.hpp"

namespace illumine::analytics {

/// MM: cells with at least one misbehaving evaluation (counter-based, not elite-based).
inline std::size_t mapped_misbehaviours(const GridMap& m) {
  return static_cast<std::size_t>(
      std::count_if(m.cells.begin(), m.cells.end(), [](const auto& kv) { return kv.second.misbehaving_evals >= 1; }));
}

/// FC: cells with at least one evaluation.
inline std::size_t filled_cells(const GridMap& m) {
  return static_cast<std::size_t>(
      std::count_if(m.cells.begin(), m.cells.end(), [](const auto& kv) { return kv.second.total_evals >= 1; }));
}

inline std::vector<Coords> misbehaving_cells(const GridMap& m) {
  std::vector<Coords> out;
  for (const auto& [c, cell] : m.cells)
    if (cell.misbehaving_evals >= 1) out.push_back(c);
  return out;
}

inline std::vector<Coords> occupied_cells(const GridMap& m) {
  std::vector<Coords> out;
  for (const auto& [c, cell] : m.cells)
    if (cell.total_evals >= 1) out.push_back(c);
  return out;
}

/// Average over cells of the largest Manhattan distance to any other cell of the set.
inline double sparseness(const std::vector<Coords>& cells) {
  if (cells.empty()) throw std::invalid_argument("sparseness of an empty cell set");
  // |a-b|_1 is the largest |s.(a-b)| over sign vectors s, so each cell's
  // farthest partner follows from the extremes of 2^(d-1) projections.
  const std::size_t dims = cells.front().size();
  if (dims == 0 || dims > 16) {
    double sum = 0.0;
    for (const auto& a : cells) {
      long best = 0;
      for (const auto& b : cells) best = std::max(best, manhattan(a, b));
      sum += static_cast<double>(best);
    }
    return sum / static_cast<double>(cells.size());
  }
  const std::size_t masks = std::size_t{1} << (dims - 1);
  std::vector<long> lo(masks, std::numeric_limits<long>::max()), hi(masks, std::numeric_limits<long>::min());
  auto projection = [&](const Coords& c, std::size_t mask) {
    long v = c[0];
    for (std::size_t i = 1; i < dims; ++i) v += (mask >> (i - 1) & 1) ? -static_cast<long>(c[i]) : c[i];
    return v;
  };
  for (const auto& c : cells) {
    if (c.size() != dims) throw std::invalid_argument("sparseness: mixed coordinate arity");
    for (std::size_t m = 0; m < masks; ++m) {
      const long v = projection(c, m);
      lo[m] = std::min(lo[m], v);
      hi[m] = std::max(hi[m], v);
    }
  }
  long total = 0;
  for (const auto& c : cells) {
    long best = 0;
    for (std::size_t m = 0; m < masks; ++m) {
      const long v = projection(c, m);
      best = std::max({best, v - lo[m], hi[m] - v});
    }
    total += best;
  }
  return static_cast<double>(total) / static_cast<double>(cells.size());
}

/// MS; empty when the map has no misbehaving cell.
inline std::optional<double> misbehaviour_sparseness(const GridMap& m) {
  auto cells = misbehaving_cells(m);
  if (cells.empty()) return std::nullopt;
  return sparseness(cells);
}

/// CS; empty for an empty map.
inline std::optional<double> coverage_sparseness(const GridMap& m) {
  auto cells = occupied_cells(m);
  if (cells.empty()) return std::nullopt;
  return sparseness(cells);
}

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for k successes out of n.
inline WilsonInterval wilson(std::uint64_t k, std::uint64_t n, double z = 1.96) {
  if (n == 0) throw std::invalid_argument("wilson: no trials");
  if (k > n) throw std::invalid_argument("wilson: more successes than trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (k == 0) w.low = 0.0;
  if (k == n) w.high = 1.0;
  w.low = std::min(w.low, p);
  w.high = std::max(w.high, p);
  return w;
}

inline constexpr double kHighlightProbability = 0.8;
inline constexpr double kHighlightLowerBound = 0.65;

struct ProbabilityCell {
  Coords coords;
  std::uint64_t total = 0;
  std::uint64_t misbehaving = 0;
  double mp = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool highlighted = false;
};

inline bool highlight_rule(double mp, double ci_low) { return mp > kHighlightProbability && ci_low > kHighlightLowerBound; }

/// MP with Wilson bounds for every occupied cell, in coordinate order.
inline std::vector<ProbabilityCell> probability_map(const GridMap& m, double z = 1.96) {
  std::vector<ProbabilityCell> out;
  out.reserve(m.cells.size());
  for (const auto& [coords, c] : m.cells) {
    if (c.total_evals == 0) continue;
    ProbabilityCell p;
    p.coords = coords;
    p.total = c.total_evals;
    p.misbehaving = c.misbehaving_evals;
    p.mp = static_cast<double>(c.misbehaving_evals) / static_cast<double>(c.total_evals);
    const WilsonInterval w = wilson(c.misbehaving_evals, c.total_evals, z);
    p.ci_low = w.low;
    p.ci_high = w.high;
    p.highlighted = highlight_rule(p.mp, p.ci_low);
    out.push_back(std::move(p));
  }
  return out;
}

/// Coverage and misbehaviour counts and spreads of one map.
struct MapMetrics {
  std::size_t mm = 0;
  std::size_t fc = 0;
  std::optional<double> ms;
  std::optional<double> cs;
};

inline MapMetrics map_metrics(const GridMap& m) {
  return {mapped_misbehaviours(m), filled_cells(m), misbehaviour_sparseness(m), coverage_sparseness(m)};
}

} // namespace illumine::analytics
