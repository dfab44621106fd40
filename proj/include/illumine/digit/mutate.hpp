#pragma once

#include <stdexcept>
#include <string>

#include "illumine/digit/genome.hpp"
#include "illumine/digit/raster.hpp"
#include "illumine/util/error.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::digit {

/// Addresses one movable point: an anchor (shared by two consecutive
/// segments of a closed subpath) or a control point.
struct PointRef {
  std::size_t path = 0;
  std::size_t segment = 0;
  enum class Kind { Anchor, Control1, Control2 } kind = Kind::Anchor;
};

inline std::size_t movable_point_count(const DigitGenome& g) {
  std::size_t n = 0;
  for (const SubPath& sp : g.paths) n += 3 * sp.size();
  return n;
}

inline PointRef point_ref(const DigitGenome& g, std::size_t index) {
  for (std::size_t p = 0; p < g.paths.size(); ++p) {
    const std::size_t here = 3 * g.paths[p].size();
    if (index < here) return {p, index / 3, static_cast<PointRef::Kind>(index % 3)};
    index -= here;
  }
  throw std::out_of_range("point_ref: index past the last movable point");
}

inline Point get_point(const DigitGenome& g, const PointRef& ref) {
  const CubicSegment& s = g.paths[ref.path][ref.segment];
  switch (ref.kind) {
  case PointRef::Kind::Anchor: return s.p0;
  case PointRef::Kind::Control1: return s.c1;
  case PointRef::Kind::Control2: return s.c2;
  }
  return s.p0;
}

/// Moves a point; an anchor moves together with the previous segment's end.
inline void set_point(DigitGenome& g, const PointRef& ref, Point value) {
  SubPath& sp = g.paths[ref.path];
  CubicSegment& s = sp[ref.segment];
  switch (ref.kind) {
  case PointRef::Kind::Anchor:
    s.p0 = value;
    sp[(ref.segment + sp.size() - 1) % sp.size()].p1 = value;
    break;
  case PointRef::Kind::Control1: s.c1 = value; break;
  case PointRef::Kind::Control2: s.c2 = value; break;
  }
}

/// One draw of the perturbation: each axis moves by +/- Uniform[lb, ub].
inline Point displacement(double lb, double ub, Rng& rng) {
  const double dx = rng.uniform(lb, ub) * (rng.coin() ? 1.0 : -1.0);
  const double dy = rng.uniform(lb, ub) * (rng.coin() ? 1.0 : -1.0);
  return {dx, dy};
}

/// Displaces one uniformly chosen point of the genome.
///
/// Candidates that leave the canvas or rasterize identically to the parent
/// are redrawn, up to `max_attempts` times.
inline DigitGenome mutate_digit(const DigitGenome& parent, double lb, double ub, Rng& rng,
                                int max_attempts = 50) {
  if (!(lb > 0.0 && lb < ub)) throw std::invalid_argument("mutate_digit: need 0 < lb < ub");
  const std::size_t count = movable_point_count(parent);
  if (count == 0) throw MutationExhausted("mutate_digit: genome has no points");
  const RasterDigit before = rasterize(parent);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const PointRef ref = point_ref(parent, rng.below(count));
    const Point old = get_point(parent, ref);
    const Point d = displacement(lb, ub, rng);
    const Point moved{old.x + d.x, old.y + d.y};
    if (!in_canvas(moved)) continue;
    DigitGenome child = parent;
    set_point(child, ref, moved);
    if (rasterize(child) == before) continue;
    return child;
  }
  throw MutationExhausted("mutate_digit: no valid distinct mutant after " + std::to_string(max_attempts) +
                          " attempts");
}

} // namespace illumine::digit
