#pragma once

#include <stdexcept>

#include "illumine/digit/genome.hpp"
#include "illumine/digit/raster.hpp"
#include "illumine/util/error.hpp"

namespace illumine::digit {

/// Lum: pixels brighter than 127.
inline int feat_luminosity(const RasterDigit& r) {
  int n = 0;
  for (auto v : r.pixels) n += v > 127;
  return n;
}

/// Mov: total pen travel between consecutive subpaths, in emission order.
inline double feat_moves(const DigitGenome& g) {
  if (g.paths.empty()) throw std::invalid_argument("feat_moves: genome has no subpaths");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.paths.size(); ++i)
    total += distance(g.paths[i].back().p1, g.paths[i + 1].front().p0);
  return total;
}

/// Or: least-squares slope of row index on column index over pixels > 0.
inline double feat_orientation(const RasterDigit& r) {
  double n = 0, sx = 0, sy = 0;
  for (int row = 0; row < kSide; ++row)
    for (int col = 0; col < kSide; ++col)
      if (r.at(row, col) > 0) {
        n += 1;
        sx += col;
        sy += row;
      }
  if (n < 2) throw FeatureUndefined("orientation undefined: fewer than two non-black pixels");
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int row = 0; row < kSide; ++row)
    for (int col = 0; col < kSide; ++col)
      if (r.at(row, col) > 0) {
        sxx += (col - mx) * (col - mx);
        sxy += (col - mx) * (row - my);
      }
  if (sxx == 0.0) throw FeatureUndefined("orientation undefined: all non-black pixels share one column");
  return sxy / sxx;
}

} // namespace illumine::digit
