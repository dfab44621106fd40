#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "illumine/digit/genome.hpp"
#include "illumine/digit/raster.hpp"

namespace illumine::digit {

/// Parameters of the bitmap-to-path tracer.
inline constexpr int kReparameterizeIterations = 4;

struct TraceOptions {
  double simplify_epsilon = 0.5; ///< Ramer-Douglas-Peucker tolerance, px
  double max_fit_error = 0.75;   ///< per-segment cubic fit tolerance, px
  double corner_angle_deg = 40.0; ///< RDP vertices turning more than this start a new run
};

namespace trace_detail {

using Polyline = std::vector<Point>;

/// Closed contours of the lit mask (value > 127).
///
/// Marching squares over the binarized image with samples at pixel centers,
/// so every crossing sits on a pixel boundary midpoint. The image is padded
/// with a dark border so every contour closes. Each crossing lies on exactly
/// two cells, so segments link into loops without an orientation convention.
/// Saddles join the lit diagonal (8-connected foreground).
inline std::vector<Polyline> marching_squares(const RasterDigit& img) {
  constexpr int n = kSide + 2; // padded sample grid
  auto inside = [&](int r, int c) {
    const int ir = r - 1, ic = c - 1;
    if (ir < 0 || ic < 0 || ir >= kSide || ic >= kSide) return false;
    return img.at(ir, ic) > 127;
  };

  // Edge ids: horizontal edge (r,c)-(r,c+1) -> 2*(r*n+c); vertical (r,c)-(r+1,c) -> 2*(r*n+c)+1.
  auto h_edge = [&](int r, int c) { return 2 * (r * n + c); };
  auto v_edge = [&](int r, int c) { return 2 * (r * n + c) + 1; };
  auto edge_point = [&](int id) -> Point {
    const int base = id / 2, r = base / n, c = base % n;
    // padded sample (r,c) is pixel (r-1,c-1) whose center is (c-0.5, r-0.5)
    if (id % 2 == 0) return {static_cast<double>(c), r - 0.5};
    return {c - 0.5, static_cast<double>(r)};
  };

  std::unordered_map<int, std::array<int, 2>> links;
  auto connect = [&](int a, int b) {
    for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      auto [it, fresh] = links.try_emplace(from, std::array<int, 2>{-1, -1});
      it->second[it->second[0] < 0 ? 0 : 1] = to;
      (void)fresh;
    }
  };

  std::vector<int> order; // cell-scan order of first appearance, for deterministic starts
  for (int r = 0; r + 1 < n; ++r) {
    for (int c = 0; c + 1 < n; ++c) {
      const bool tl = inside(r, c), tr = inside(r, c + 1), br = inside(r + 1, c + 1), bl = inside(r + 1, c);
      const int T = h_edge(r, c), B = h_edge(r + 1, c), L = v_edge(r, c), R = v_edge(r, c + 1);
      std::vector<int> crossings;
      if (tl != tr) crossings.push_back(T);
      if (tr != br) crossings.push_back(R);
      if (br != bl) crossings.push_back(B);
      if (bl != tl) crossings.push_back(L);
      if (crossings.empty()) continue;
      for (int e : crossings)
        if (!links.contains(e)) order.push_back(e);
      if (crossings.size() == 2) {
        connect(crossings[0], crossings[1]);
        continue;
      }
      // saddle: keep the lit diagonal connected
      if (tl) {
        // cut off the top-right and bottom-left corners
        connect(T, R);
        connect(B, L);
      } else {
        connect(L, T);
        connect(R, B);
      }
    }
  }

  std::vector<Polyline> loops;
  std::unordered_map<int, bool> visited;
  for (int start : order) {
    if (visited[start]) continue;
    Polyline loop;
    int prev = -1, cur = start;
    while (!visited[cur]) {
      visited[cur] = true;
      loop.push_back(edge_point(cur));
      const auto& nb = links.at(cur);
      const int next = nb[0] != prev ? nb[0] : nb[1];
      prev = cur;
      cur = next;
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return distance(p, {a.x + t * dx, a.y + t * dy});
}

// Keeps indices in [first, last] of an open run.
inline void rdp(const Polyline& pts, std::size_t first, std::size_t last, double eps, std::vector<bool>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t at = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = point_segment_distance(pts[i], pts[first], pts[last]);
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst > eps) {
    keep[at] = true;
    rdp(pts, first, at, eps, keep);
    rdp(pts, at, last, eps, keep);
  }
}

inline double signed_area(const Polyline& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point p = loop[i], q = loop[(i + 1) % loop.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2.0;
}

inline bool contains(const Polyline& loop, Point p) {
  bool in = false;
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    const Point a = loop[i], b = loop[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

inline Point clamp_to_canvas(Point p) {
  return {std::clamp(p.x, 0.0, kCanvas), std::clamp(p.y, 0.0, kCanvas)};
}

/// Least-squares cubic through pts[0] and pts.back() with chord-length
/// parameters. Returns the segment and its max parametric error.
inline std::pair<CubicSegment, double> fit_cubic(const Polyline& pts) {
  const Point a = pts.front(), b = pts.back();
  CubicSegment seg{a, {a.x + (b.x - a.x) / 3, a.y + (b.y - a.y) / 3},
                   {a.x + 2 * (b.x - a.x) / 3, a.y + 2 * (b.y - a.y) / 3}, b};
  if (pts.size() <= 3) {
    double err = 0.0;
    for (Point p : pts) err = std::max(err, point_segment_distance(p, a, b));
    return {seg, err};
  }
  std::vector<double> t(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) t[i] = t[i - 1] + distance(pts[i - 1], pts[i]);
  const double total = t.back();
  if (total <= 0.0) return {seg, 0.0};
  for (double& v : t) v /= total;

  auto solve = [&] {
    double s11 = 0, s12 = 0, s22 = 0, rx1 = 0, ry1 = 0, rx2 = 0, ry2 = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double u = 1 - t[i];
      const double b0 = u * u * u, b1 = 3 * u * u * t[i], b2 = 3 * u * t[i] * t[i], b3 = t[i] * t[i] * t[i];
      const double qx = pts[i].x - b0 * a.x - b3 * b.x, qy = pts[i].y - b0 * a.y - b3 * b.y;
      s11 += b1 * b1;
      s12 += b1 * b2;
      s22 += b2 * b2;
      rx1 += b1 * qx;
      ry1 += b1 * qy;
      rx2 += b2 * qx;
      ry2 += b2 * qy;
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) > 1e-12) {
      seg.c1 = clamp_to_canvas({(rx1 * s22 - rx2 * s12) / det, (ry1 * s22 - ry2 * s12) / det});
      seg.c2 = clamp_to_canvas({(rx2 * s11 - rx1 * s12) / det, (ry2 * s11 - ry1 * s12) / det});
    }
  };
  auto max_error = [&] {
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, distance(seg.at(t[i]), pts[i]));
    return err;
  };

  solve();
  // Newton reparameterization: move each t_i toward the closest curve point.
  for (int iter = 0; iter < kReparameterizeIterations; ++iter) {
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double u = t[i], w = 1 - u;
      const Point p = seg.at(u);
      const Point d1{3 * (w * w * (seg.c1.x - seg.p0.x) + 2 * w * u * (seg.c2.x - seg.c1.x) + u * u * (seg.p1.x - seg.c2.x)),
                     3 * (w * w * (seg.c1.y - seg.p0.y) + 2 * w * u * (seg.c2.y - seg.c1.y) + u * u * (seg.p1.y - seg.c2.y))};
      const Point d2{6 * (w * (seg.c2.x - 2 * seg.c1.x + seg.p0.x) + u * (seg.p1.x - 2 * seg.c2.x + seg.c1.x)),
                     6 * (w * (seg.c2.y - 2 * seg.c1.y + seg.p0.y) + u * (seg.p1.y - 2 * seg.c2.y + seg.c1.y))};
      const double ex = p.x - pts[i].x, ey = p.y - pts[i].y;
      const double num = ex * d1.x + ey * d1.y;
      const double den = d1.x * d1.x + d1.y * d1.y + ex * d2.x + ey * d2.y;
      if (std::abs(den) > 1e-12) t[i] = std::clamp(u - num / den, 0.0, 1.0);
    }
    solve();
  }
  return {seg, max_error()};
}

inline void fit_run(const Polyline& run, double tol, SubPath& out) {
  auto [seg, err] = fit_cubic(run);
  if (err <= tol || run.size() <= 3) {
    out.push_back(seg);
    return;
  }
  // split at the point farthest from the chord
  std::size_t at = run.size() / 2;
  double worst = -1.0;
  for (std::size_t i = 1; i + 1 < run.size(); ++i) {
    const double d = point_segment_distance(run[i], run.front(), run.back());
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst <= 1e-9) at = run.size() / 2;
  fit_run(Polyline(run.begin(), run.begin() + static_cast<std::ptrdiff_t>(at) + 1), tol, out);
  fit_run(Polyline(run.begin() + static_cast<std::ptrdiff_t>(at), run.end()), tol, out);
}

inline SubPath fit_loop(Polyline loop, const TraceOptions& opt) {
  for (Point& p : loop) p = clamp_to_canvas(p);
  const std::size_t n = loop.size();

  // Break the closed loop at vertex 0 and the vertex farthest from it.
  std::size_t far = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (distance(loop[i], loop[0]) > distance(loop[far], loop[0])) far = i;
  Polyline open(loop);
  open.push_back(loop[0]);
  std::vector<bool> keep(open.size(), false);
  keep[0] = keep[far] = keep[n] = true;
  rdp(open, 0, far, opt.simplify_epsilon, keep);
  rdp(open, far, n, opt.simplify_epsilon, keep);

  std::vector<std::size_t> vertices;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) vertices.push_back(i);

  // Corners: simplified vertices with a sharp turn; runs between corners get one fit each.
  const double corner = opt.corner_angle_deg * std::numbers::pi / 180.0;
  std::vector<std::size_t> breaks;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const Point prev = loop[vertices[(k + vertices.size() - 1) % vertices.size()]];
    const Point cur = loop[vertices[k]];
    const Point next = loop[vertices[(k + 1) % vertices.size()]];
    const double a1 = std::atan2(cur.y - prev.y, cur.x - prev.x);
    const double a2 = std::atan2(next.y - cur.y, next.x - cur.x);
    double turn = std::abs(a2 - a1);
    if (turn > std::numbers::pi) turn = 2 * std::numbers::pi - turn;
    if (turn > corner) breaks.push_back(vertices[k]);
  }
  if (breaks.size() < 2) breaks = {0, far};
  if (breaks.front() != 0) {
    // rotate so the loop starts on a break point
    std::rotate(loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(breaks.front()), loop.end());
    const std::size_t shift = breaks.front();
    for (std::size_t& b : breaks) b = (b + n - shift) % n;
  }

  SubPath path;
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const std::size_t from = breaks[k];
    const std::size_t to = k + 1 < breaks.size() ? breaks[k + 1] : n;
    Polyline run;
    for (std::size_t i = from; i <= to; ++i) run.push_back(loop[i % n]);
    fit_run(run, opt.max_fit_error, path);
  }
  // exact closure and continuity
  for (std::size_t s = 0; s < path.size(); ++s) path[s].p1 = path[(s + 1) % path.size()].p0;
  return path;
}

} // namespace trace_detail

/// Vectorizes a grayscale digit into closed cubic Bézier subpaths.
///
/// Contours are extracted at the lit threshold (> 127), simplified, and fit
/// with cubics. Outer contours are emitted top-to-bottom, left-to-right,
/// each followed by the holes it directly contains; even-odd filling of the
/// result reproduces the shape.
inline DigitGenome trace_bitmap(const RasterDigit& img, int expected_label = 0, const TraceOptions& opt = {}) {
  using namespace trace_detail;
  bool any = false;
  for (auto v : img.pixels) any |= v > 127;
  if (!any) throw std::invalid_argument("trace_bitmap: no shape");

  std::vector<Polyline> loops = marching_squares(img);

  // depth = number of loops containing this one; odd depth = hole
  const std::size_t m = loops.size();
  std::vector<int> depth(m, 0);
  std::vector<std::ptrdiff_t> parent(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    double best_area = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || !contains(loops[j], loops[i][0])) continue;
      ++depth[i];
      const double area = std::abs(signed_area(loops[j]));
      if (parent[i] < 0 || area < best_area) {
        parent[i] = static_cast<std::ptrdiff_t>(j);
        best_area = area;
      }
    }
  }
  auto scan_key = [&](std::size_t i) {
    const auto& l = loops[i];
    const Point top = *std::min_element(l.begin(), l.end(), [](Point a, Point b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return std::pair{top.y, top.x};
  };
  std::vector<std::size_t> outers, holes;
  for (std::size_t i = 0; i < m; ++i) (depth[i] % 2 == 0 ? outers : holes).push_back(i);
  auto by_scan = [&](std::size_t a, std::size_t b) { return scan_key(a) < scan_key(b); };
  std::sort(outers.begin(), outers.end(), by_scan);
  std::sort(holes.begin(), holes.end(), by_scan);

  DigitGenome g;
  g.expected_label = expected_label;
  for (std::size_t o : outers) {
    g.paths.push_back(fit_loop(loops[o], opt));
    for (std::size_t h : holes)
      if (parent[h] == static_cast<std::ptrdiff_t>(o)) g.paths.push_back(fit_loop(loops[h], opt));
  }
  return g;
}

} // namespace illumine::digit
