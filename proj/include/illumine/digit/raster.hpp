#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "illumine/digit/genome.hpp"
#include "illumine/util/hash.hpp"

namespace illumine::digit {

/// 28x28 grayscale image, row-major, 0 = black.
struct RasterDigit {
  std::array<std::uint8_t, kSide * kSide> pixels{};

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row * kSide + col)]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row * kSide + col)]; }

  friend bool operator==(const RasterDigit&, const RasterDigit&) = default;
};

inline std::string digest(const RasterDigit& r) {
  Fnv1a h;
  h.update(std::span<const std::uint8_t>(r.pixels));
  return h.hex();
}

inline constexpr int kSupersample = 4;
inline constexpr int kFlattenSteps = 16;

namespace detail {

struct Edge {
  double x0, y0, x1, y1;
};

inline void flatten(const DigitGenome& g, std::vector<Edge>& edges) {
  for (const SubPath& sp : g.paths) {
    for (const CubicSegment& s : sp) {
      Point prev = s.p0;
      for (int k = 1; k <= kFlattenSteps; ++k) {
        const Point cur = k == kFlattenSteps ? s.p1 : s.at(static_cast<double>(k) / kFlattenSteps);
        if (prev.y != cur.y) edges.push_back({prev.x, prev.y, cur.x, cur.y});
        prev = cur;
      }
    }
  }
}

} // namespace detail

/// Even-odd fill with 4x4 supersampling; value = round(255 * covered fraction).
inline RasterDigit rasterize(const DigitGenome& g) {
  std::vector<detail::Edge> edges;
  detail::flatten(g, edges);

  constexpr int samples_per_row = kSide * kSupersample;
  std::array<int, kSide * kSide> hits{};
  std::vector<double> xs;
  for (int sy = 0; sy < samples_per_row; ++sy) {
    const double y = (sy + 0.5) / kSupersample;
    xs.clear();
    for (const auto& e : edges) {
      const bool down = e.y0 <= y && y < e.y1;
      const bool up = e.y1 <= y && y < e.y0;
      if (down || up) xs.push_back(e.x0 + (y - e.y0) * (e.x1 - e.x0) / (e.y1 - e.y0));
    }
    std::sort(xs.begin(), xs.end());
    const int row = sy / kSupersample;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // sample columns m with (m + 0.5) / 4 in [xs[k], xs[k+1])
      int first = static_cast<int>(std::ceil(xs[k] * kSupersample - 0.5));
      int last = static_cast<int>(std::ceil(xs[k + 1] * kSupersample - 0.5)) - 1;
      first = std::max(first, 0);
      last = std::min(last, samples_per_row - 1);
      for (int m = first; m <= last; ++m) hits[static_cast<std::size_t>(row * kSide + m / kSupersample)] += 1;
    }
  }

  RasterDigit out;
  constexpr int full = kSupersample * kSupersample;
  for (std::size_t i = 0; i < hits.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>((255 * hits[i] + full / 2) / full);
  return out;
}

/// Pixels whose lit status (> 127) differs.
inline int lit_difference(const RasterDigit& a, const RasterDigit& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) n += (a.pixels[i] > 127) != (b.pixels[i] > 127);
  return n;
}

} // namespace illumine::digit
