#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "illumine/core/feature_map.hpp"
#include "illumine/util/rng.hpp"

namespace illumine {

/// Indices of a greedily built max-min diverse subset of `points`.
///
/// Starts from a uniformly random point, then repeatedly adds the candidate
/// whose minimum Manhattan distance to the chosen set is largest. Ties go to
/// the lowest index.
inline std::vector<std::size_t> diverse_subset(const std::vector<Coords>& points, std::size_t size,
                                               Rng& rng) {
  if (points.size() < size) throw std::invalid_argument("diverse_subset: fewer seeds than population size");
  std::vector<std::size_t> chosen;
  if (size == 0) return chosen;
  chosen.reserve(size);

  std::vector<bool> taken(points.size(), false);
  std::vector<long> min_dist(points.size(), std::numeric_limits<long>::max());

  auto take = [&](std::size_t i) {
    taken[i] = true;
    chosen.push_back(i);
    for (std::size_t j = 0; j < points.size(); ++j)
      if (!taken[j]) min_dist[j] = std::min(min_dist[j], manhattan(points[i], points[j]));
  };

  take(rng.below(points.size()));
  while (chosen.size() < size) {
    std::size_t best = points.size();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (taken[j]) continue;
      if (best == points.size() || min_dist[j] > min_dist[best]) best = j;
    }
    take(best);
  }
  return chosen;
}

template <MapEntry T>
std::vector<T> initialise_population(const std::vector<T>& seeds, std::size_t popsize, Rng& rng) {
  std::vector<Coords> coords;
  coords.reserve(seeds.size());
  for (const T& s : seeds) coords.push_back(s.coords());
  std::vector<T> out;
  for (std::size_t i : diverse_subset(coords, popsize, rng)) out.push_back(seeds[i]);
  return out;
}

} // namespace illumine
