#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "illumine/util/rng.hpp"

namespace illumine::analytics {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1); 0 for a single value.
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline constexpr int kPermutationResamples = 499;

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: samples differ in length");
  if (xs.size() < 3) throw std::invalid_argument("pearson: need at least 3 pairs");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Product-moment r with a two-sided permutation p-value.
///
/// p = (1 + #{|r_perm| > |r|}) / (1 + resamples); the smallest attainable
/// value is 1/500 with the default 499 resamples.
inline Correlation pearson(std::span<const double> xs, std::span<const double> ys,
                           int resamples = kPermutationResamples, std::uint64_t seed = 0x5eed) {
  Correlation c;
  c.r = pearson_r(xs, ys);
  Rng rng(seed);
  std::vector<double> shuffled(ys.begin(), ys.end());
  int exceed = 0;
  for (int k = 0; k < resamples; ++k) {
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    if (std::abs(pearson_r(xs, shuffled)) > std::abs(c.r) + 1e-12) ++exceed;
  }
  c.p = (1.0 + exceed) / (1.0 + resamples);
  return c;
}

struct MannWhitney {
  double u = 0.0; ///< U of the first sample
  double p = 1.0; ///< two-sided, normal approximation
};

/// Mann-Whitney U with midranks, tie-corrected variance and continuity correction.
inline MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double x : a) pooled.emplace_back(x, 0);
  for (double x : b) pooled.emplace_back(x, 1);
  std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second == 0) rank_sum_a += midrank;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
  MannWhitney r;
  r.u = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  const double mu = dn1 * dn2 / 2.0;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - (n > 1 ? tie_term / (dn * (dn - 1.0)) : 0.0));
  if (var <= 0.0) return {r.u, 1.0};
  const double diff = std::abs(r.u - mu);
  const double z = std::max(0.0, diff - 0.5) / std::sqrt(var);
  r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

/// A12: probability that a draw from `a` exceeds one from `b`, ties counting half.
inline double vargha_delaney_a12(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("vargha_delaney_a12: empty sample");
  double wins = 0.0;
  for (double x : a)
    for (double y : b) wins += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

/// Fraction of paired ratings that differ by at most one.
inline double percentage_within_one(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("percentage_within_one: need equal, non-empty samples");
  std::size_t close = 0;
  for (std::size_t i = 0; i < a.size(); ++i) close += std::abs(a[i] - b[i]) <= 1.0;
  return static_cast<double>(close) / static_cast<double>(a.size());
}

} // namespace illumine::analytics
