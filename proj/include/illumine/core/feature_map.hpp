#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "illumine/util/rng.hpp"

namespace illumine {

/// Integer cell coordinates, one entry per feature dimension.
using Coords = std::vector<int>;

/// x_i = floor(alpha_i * f_i). Negative coordinates are legal keys.
inline Coords map_coordinates(std::span<const double> features, std::span<const double> alpha,
                              std::span<const std::string> names = {}) {
  if (features.size() != alpha.size())
    throw std::invalid_argument("map_coordinates: feature/scale length mismatch");
  Coords out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      const std::string name = i < names.size() ? names[i] : "feature " + std::to_string(i);
      throw std::domain_error("non-finite value for metric " + name);
    }
    out[i] = static_cast<int>(std::floor(alpha[i] * features[i]));
  }
  return out;
}

inline long manhattan(const Coords& a, const Coords& b) {
  long d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::labs(static_cast<long>(a[i]) - b[i]);
  return d;
}

/// What a map cell can hold: anything that knows its fitness, its
/// misbehaviour flag and where it was mapped.
template <typename T>
concept MapEntry = requires(const T& t) {
  { t.fitness() } -> std::convertible_to<double>;
  { t.misbehaviour() } -> std::convertible_to<bool>;
  { t.coords() } -> std::convertible_to<const Coords&>;
};

template <MapEntry Elite>
struct Cell {
  Elite elite;
  std::uint64_t total_evals = 0;
  std::uint64_t misbehaving_evals = 0;
};

struct Placement {
  Coords coords;
  bool replaced = false;
};

/// Sparse, dynamically growing grid of elites.
///
/// The map keeps the lowest-fitness entry ever seen per cell (ties keep the
/// incumbent) plus per-cell evaluation and misbehaviour counters. The
/// observed coordinate range grows as new cells are discovered and never
/// shrinks.
template <MapEntry Elite>
class FeatureMap {
public:
  using cell_type = Cell<Elite>;
  using container = std::map<Coords, cell_type>;

  FeatureMap() = default;

  Placement update(Elite entry) {
    const Coords& c = entry.coords();
    extend_ranges(c);
    auto [it, inserted] = cells_.try_emplace(c, cell_type{entry, 0, 0});
    cell_type& cell = it->second;
    cell.total_evals += 1;
    if (entry.misbehaviour()) cell.misbehaving_evals += 1;
    bool replaced = inserted;
    if (inserted) {
      order_.push_back(it);
    } else if (entry.fitness() < cell.elite.fitness()) {
      cell.elite = std::move(entry);
      replaced = true;
    }
    return {it->first, replaced};
  }

  /// Uniform over occupied cells.
  const Elite& random_selection(Rng& rng) const {
    if (order_.empty()) throw std::logic_error("random_selection on an empty map");
    return order_[rng.below(order_.size())]->second.elite;
  }

  const container& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  std::size_t dimensions() const { return ranges_.size(); }

  const cell_type* find(const Coords& c) const {
    auto it = cells_.find(c);
    return it == cells_.end() ? nullptr : &it->second;
  }

  /// Inclusive [lo, hi] per dimension; empty before the first insertion.
  const std::vector<std::pair<int, int>>& ranges() const { return ranges_; }

  /// Number of cells spanned by the observed ranges (not the occupied count).
  std::uint64_t range_cell_count() const {
    if (ranges_.empty()) return 0;
    std::uint64_t n = 1;
    for (auto [lo, hi] : ranges_) n *= static_cast<std::uint64_t>(hi - lo + 1);
    return n;
  }

  std::uint64_t total_evaluations() const {
    std::uint64_t n = 0;
    for (const auto& [_, cell] : cells_) n += cell.total_evals;
    return n;
  }

private:
  void extend_ranges(const Coords& c) {
    if (ranges_.empty()) {
      for (int x : c) ranges_.emplace_back(x, x);
      return;
    }
    if (c.size() != ranges_.size()) throw std::invalid_argument("FeatureMap: coordinate arity changed");
    for (std::size_t i = 0; i < c.size(); ++i) {
      ranges_[i].first = std::min(ranges_[i].first, c[i]);
      ranges_[i].second = std::max(ranges_[i].second, c[i]);
    }
  }

  container cells_;
  std::vector<typename container::iterator> order_;
  std::vector<std::pair<int, int>> ranges_;
};

template <MapEntry Elite>
Placement update_map(FeatureMap<Elite>& map, Elite entry) {
  return map.update(std::move(entry));
}

template <MapEntry Elite>
const Elite& random_selection(const FeatureMap<Elite>& map, Rng& rng) {
  return map.random_selection(rng);
}

} // namespace illumine
