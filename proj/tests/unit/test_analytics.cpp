#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "illumine/analytics/export.hpp"
#include "illumine/analytics/grid.hpp"
#include "illumine/analytics/metrics.hpp"
#include "illumine/analytics/stats.hpp"
#include "illumine/util/rng.hpp"

using namespace illumine;
using namespace illumine::analytics;

namespace {

GridMap map_of(std::initializer_list<std::tuple<Coords, std::uint64_t, std::uint64_t>> cells) {
  GridMap m;
  m.features = {"A", "B"};
  for (const auto& [c, total, bad] : cells) m.cells.emplace(c, GridCell{c, 0, 0.5, total, bad});
  return m;
}

double brute_sparseness(const std::vector<Coords>& cells) {
  double sum = 0.0;
  for (const auto& a : cells) {
    long best = 0;
    for (const auto& b : cells) {
      long d = 0;
      for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
      best = std::max(best, d);
    }
    sum += static_cast<double>(best);
  }
  return sum / static_cast<double>(cells.size());
}

std::vector<Coords> random_cells(Rng& rng, std::size_t n, std::size_t dims, int span) {
  std::size_t space = 1;
  for (std::size_t i = 0; i < dims; ++i) space *= static_cast<std::size_t>(span);
  n = std::min(n, space);
  std::vector<Coords> out;
  while (out.size() < n) {
    Coords c(dims);
    for (auto& v : c) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

LoadedArchive synthetic_archive(Rng& rng, std::size_t n, double shift = 0.0) {
  LoadedArchive a;
  a.dir = "synthetic";
  a.config = {{"features", {"A", "B"}}};
  for (std::size_t i = 0; i < n; ++i) {
    EvaluationRecord r;
    r.id = i;
    r.features = {rng.uniform(0, 10) + shift, rng.uniform(-3, 3)};
    r.fitness = rng.uniform(-1, 1);
    r.coords = {static_cast<int>(r.features[0]), static_cast<int>(r.features[1])};
    a.log.push_back(r);
  }
  return a;
}

} // namespace

TEST(Rescale, BinExamples) {
  EXPECT_EQ(rescale_bin(10.0, 0.0, 10.0, 25), 24);
  EXPECT_EQ(rescale_bin(0.0, 0.0, 10.0, 25), 0);
  EXPECT_EQ(rescale_bin(5.0, 0.0, 10.0, 25), 12);
  EXPECT_EQ(rescale_bin(9.99, 0.0, 10.0, 25), 24);
  EXPECT_EQ(rescale_bin(0.4, 0.0, 10.0, 25), 1);
  EXPECT_THROW(rescale_bin(1.0, 3.0, 3.0, 25), ConfigError);
}

TEST(Rescale, PreservesTotalsAndMisbehaviours) {
  Rng rng(5);
  const std::vector<LoadedArchive> archives{synthetic_archive(rng, 400), synthetic_archive(rng, 250, 2.0)};
  const auto maps = rescale_all(archives, 25);
  ASSERT_EQ(maps.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(maps[i].total_evaluations(), archives[i].log.size());
    std::uint64_t bad = 0, logged_bad = 0;
    for (const auto& [c, cell] : maps[i].cells) {
      bad += cell.misbehaving_evals;
      for (int v : c) {
        EXPECT_GE(v, 0);
        EXPECT_LT(v, 25);
      }
    }
    for (const auto& r : archives[i].log) logged_bad += r.misbehaviour();
    EXPECT_EQ(bad, logged_bad);
  }
  EXPECT_EQ(maps[0].lower, maps[1].lower);
  EXPECT_EQ(maps[0].upper, maps[1].upper);
}

TEST(Rescale, ElitesArePerBinMinima) {
  Rng rng(6);
  const std::vector<LoadedArchive> archives{synthetic_archive(rng, 500)};
  const GridMap m = rescale_all(archives, 10).front();
  const RescaleSpec spec{10, m.lower, m.upper};
  std::map<Coords, double> best;
  for (const auto& r : archives[0].log) {
    const Coords c{rescale_bin(r.features[0], spec.lower[0], spec.upper[0], 10),
                   rescale_bin(r.features[1], spec.lower[1], spec.upper[1], 10)};
    auto [it, fresh] = best.try_emplace(c, r.fitness);
    if (!fresh) it->second = std::min(it->second, r.fitness);
  }
  ASSERT_EQ(best.size(), m.cells.size());
  for (const auto& [c, f] : best) EXPECT_EQ(m.cells.at(c).elite_fitness, f);
}

TEST(Rescale, RejectsMismatchedFeaturesAndDegenerateRanges) {
  Rng rng(7);
  std::vector<LoadedArchive> archives{synthetic_archive(rng, 20), synthetic_archive(rng, 20)};
  archives[1].config["features"] = {"A", "C"};
  EXPECT_THROW(rescale_all(archives, 25), ConfigError);
  archives.pop_back();
  for (auto& r : archives[0].log) r.features[1] = 1.0;
  EXPECT_THROW(rescale_all(archives, 25), ConfigError);
  EXPECT_THROW(rescale_all(std::span<const LoadedArchive>{}, 25), ConfigError);
}

TEST(Merge, SumsCountersAndKeepsLowestElite) {
  GridMap a = map_of({{{0, 0}, 3, 1}, {{1, 1}, 2, 0}});
  GridMap b = map_of({{{0, 0}, 4, 4}});
  b.cells.at({0, 0}).elite_fitness = -0.3;
  b.cells.at({0, 0}).elite_id = 9;
  const std::vector<GridMap> maps{a, b};
  const GridMap m = merge(maps);
  EXPECT_EQ(m.cells.at({0, 0}).total_evals, 7u);
  EXPECT_EQ(m.cells.at({0, 0}).misbehaving_evals, 5u);
  EXPECT_EQ(m.cells.at({0, 0}).elite_id, 9u);
  EXPECT_EQ(m.total_evaluations(), 9u);
}

TEST(MapMetrics, Examples) {
  const GridMap empty;
  EXPECT_EQ(mapped_misbehaviours(empty), 0u);
  EXPECT_EQ(filled_cells(empty), 0u);
  EXPECT_FALSE(misbehaviour_sparseness(empty));
  EXPECT_FALSE(coverage_sparseness(empty));

  // elite is fine but an earlier evaluation in the cell misbehaved
  const GridMap one = map_of({{{2, 3}, 5, 1}});
  EXPECT_EQ(mapped_misbehaviours(one), 1u);

  // a 4 x 3 observed range with only two occupied cells
  const GridMap two = map_of({{{2, 3}, 1, 0}, {{5, 1}, 1, 0}});
  EXPECT_EQ(filled_cells(two), 2u);
  EXPECT_EQ(mapped_misbehaviours(two), 0u);
  EXPECT_DOUBLE_EQ(*coverage_sparseness(two), 5.0);
}

TEST(MapMetrics, MisbehavioursNeverExceedFilledCells) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    GridMap m;
    for (const auto& c : random_cells(rng, 1 + rng.below(40), 2, 15)) {
      const std::uint64_t total = 1 + rng.below(10);
      m.cells.emplace(c, GridCell{c, 0, 0.0, total, rng.below(total + 1)});
    }
    const MapMetrics mm = map_metrics(m);
    EXPECT_LE(mm.mm, mm.fc);
    EXPECT_EQ(mm.fc, m.cells.size());
  }
}

TEST(Sparseness, Examples) {
  EXPECT_EQ(sparseness({{3, 3}}), 0.0);
  EXPECT_EQ(sparseness({{0, 0}, {2, 3}}), 5.0);
  EXPECT_EQ(sparseness({{0, 0}, {1, 0}, {4, 0}}), (4.0 + 3.0 + 4.0) / 3.0);
  EXPECT_THROW(sparseness({}), std::invalid_argument);
}

TEST(Sparseness, MatchesBruteForce) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t dims = 1 + rng.below(4);
    const auto cells = random_cells(rng, 1 + rng.below(100), dims, 30);
    EXPECT_EQ(sparseness(cells), brute_sparseness(cells));
  }
}

TEST(Sparseness, ZeroOnlyForSingletonsAndTranslationInvariant) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    auto cells = random_cells(rng, 1 + rng.below(20), 2, 25);
    const double s = sparseness(cells);
    EXPECT_EQ(s == 0.0, cells.size() == 1);
    const int dx = static_cast<int>(rng.below(50)) - 25, dy = static_cast<int>(rng.below(50)) - 25;
    for (auto& c : cells) {
      c[0] += dx;
      c[1] += dy;
    }
    EXPECT_EQ(sparseness(cells), s);
  }
}

TEST(Wilson, MatchesHighPrecisionValues) {
  struct Case {
    std::uint64_t k, n;
    double low, high;
  };
  const Case cases[] = {
      {0, 10, 0.0, 0.27754016876661657612},
      {8, 10, 0.49015684672072339125, 0.94331905201930666308},
      {50, 100, 0.40382982859014715445, 0.59617017140985284555},
      {3, 7, 0.15821692226262678891, 0.7495457695909741556},
      {99, 100, 0.94551247523906539321, 0.9982326134344527344},
  };
  for (const auto& c : cases) {
    const auto w = wilson(c.k, c.n);
    EXPECT_NEAR(w.low, c.low, 1e-9) << c.k << '/' << c.n;
    EXPECT_NEAR(w.high, c.high, 1e-9) << c.k << '/' << c.n;
  }
  EXPECT_EQ(wilson(10, 10).high, 1.0);
  EXPECT_THROW(wilson(0, 0), std::invalid_argument);
  EXPECT_THROW(wilson(3, 2), std::invalid_argument);
}

TEST(Wilson, BoundsBracketTheEstimateAndShrinkWithN) {
  for (std::uint64_t n = 1; n <= 60; ++n)
    for (std::uint64_t k = 0; k <= n; ++k) {
      const auto w = wilson(k, n);
      const double p = static_cast<double>(k) / static_cast<double>(n);
      EXPECT_LE(0.0, w.low);
      EXPECT_LE(w.low, p);
      EXPECT_LE(p, w.high);
      EXPECT_LE(w.high, 1.0);
    }
  double width = 1.0;
  for (std::uint64_t n = 4; n <= 4096; n *= 2) {
    const auto w = wilson(n / 4, n);
    EXPECT_LT(w.high - w.low, width);
    width = w.high - w.low;
  }
}

TEST(ProbabilityMap, HighlightRule) {
  const GridMap m = map_of({{{0, 0}, 10, 10}, {{0, 1}, 10, 8}, {{1, 0}, 5, 5}, {{1, 1}, 40, 36}, {{2, 2}, 10, 0}});
  const auto cells = probability_map(m);
  ASSERT_EQ(cells.size(), 5u);
  std::map<Coords, ProbabilityCell> by;
  for (const auto& p : cells) by[p.coords] = p;
  auto cell = [&](int x, int y) { return by.at(Coords{x, y}); };
  EXPECT_TRUE(cell(0, 0).highlighted);   // 1.0, low 0.72
  EXPECT_FALSE(cell(0, 1).highlighted);  // MP exactly 0.8
  EXPECT_FALSE(cell(1, 0).highlighted);  // 1.0 but low 0.57
  EXPECT_TRUE(cell(1, 1).highlighted);   // 0.9, low 0.77
  EXPECT_FALSE(cell(2, 2).highlighted);
  EXPECT_EQ(cell(2, 2).ci_low, 0.0);
  EXPECT_EQ(cell(0, 0).ci_high, 1.0);
  for (const auto& p : cells) EXPECT_EQ(p.highlighted, p.mp > 0.8 && p.ci_low > 0.65);
}

TEST(Pearson, PerfectLinearRelationHitsThePermutationFloor) {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2 * x + 1);
  const auto c = pearson(xs, ys);
  EXPECT_DOUBLE_EQ(c.r, 1.0);
  EXPECT_DOUBLE_EQ(c.p, 0.002);
  std::vector<double> neg;
  for (double x : xs) neg.push_back(-x);
  EXPECT_DOUBLE_EQ(pearson(xs, neg).r, -1.0);
  EXPECT_DOUBLE_EQ(pearson(xs, neg).p, 0.002);
}

TEST(Pearson, Errors) {
  const std::vector<double> xs{1, 2, 3, 4}, flat{2, 2, 2, 2};
  EXPECT_THROW(pearson(xs, flat), std::invalid_argument);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(pearson(xs, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Pearson, BoundedAndNoiseGivesLargeP) {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 30; ++i) {
      xs.push_back(rng.uniform());
      ys.push_back(rng.uniform());
    }
    const auto c = pearson(xs, ys, 99, static_cast<std::uint64_t>(t));
    EXPECT_LE(std::abs(c.r), 1.0);
    EXPECT_GE(c.p, 0.01);
    EXPECT_LE(c.p, 1.0);
  }
}

TEST(MannWhitney, MatchesReferenceValues) {
  struct Case {
    std::vector<double> a, b;
    double u, p;
  };
  const std::vector<Case> cases{
      {{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}, 0.0, 0.012185780355344813},
      {{1, 2, 2, 3, 5, 8}, {2, 3, 3, 4, 9}, 11.0, 0.5150756716148062},
      {{3.1, 4.2, 4.2, 5, 6.5, 7, 9.9}, {1, 2, 4.2, 5, 5.5}, 25.5, 0.21915227469076204},
      {{1, 1, 1}, {1, 1, 1, 1}, 6.0, 1.0},
  };
  for (const auto& c : cases) {
    const auto r = mann_whitney_u(c.a, c.b);
    EXPECT_DOUBLE_EQ(r.u, c.u);
    EXPECT_NEAR(r.p, c.p, 1e-12);
  }
}

TEST(MannWhitney, UMatchesPairCounting) {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(1 + rng.below(12)), b(1 + rng.below(12));
    for (auto& v : a) v = static_cast<double>(rng.below(6));
    for (auto& v : b) v = static_cast<double>(rng.below(6));
    double pairs = 0.0;
    for (double x : a)
      for (double y : b) pairs += x > y ? 1.0 : x == y ? 0.5 : 0.0;
    EXPECT_DOUBLE_EQ(mann_whitney_u(a, b).u, pairs);
    EXPECT_DOUBLE_EQ(vargha_delaney_a12(a, b), pairs / static_cast<double>(a.size() * b.size()));
  }
}

TEST(VarghaDelaney, Examples) {
  const std::vector<double> a{1, 2, 3, 3, 7};
  EXPECT_DOUBLE_EQ(vargha_delaney_a12(a, a), 0.5);
  EXPECT_DOUBLE_EQ(vargha_delaney_a12(std::vector<double>{5, 6}, std::vector<double>{1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(vargha_delaney_a12(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 0.0);
  EXPECT_THROW(vargha_delaney_a12(std::vector<double>{}, a), std::invalid_argument);
}

TEST(Descriptive, Examples) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(v), 5.0);
  EXPECT_DOUBLE_EQ(median(v), 4.5);
  EXPECT_NEAR(sample_sd(v), std::sqrt(32.0 / 7.0), 1e-15);
  EXPECT_DOUBLE_EQ(sample_sd(std::vector<double>{3}), 0.0);
  EXPECT_DOUBLE_EQ(percentage_within_one(std::vector<double>{1, 2, 5}, std::vector<double>{2, 4, 5}), 2.0 / 3.0);
}

TEST(Export, CsvHasOneRowPerOccupiedCell) {
  const GridMap m = map_of({{{0, 0}, 10, 10}, {{3, 1}, 4, 1}});
  const std::string csv = cells_csv(m);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "A,B,elite_fitness,total_evals,misbehaving_evals,mp,ci_low,ci_high,highlighted");
  EXPECT_NE(csv.find("0,0,0.5,10,10,1,"), std::string::npos);
  EXPECT_NE(csv.find(",true\n"), std::string::npos);
  EXPECT_NE(csv.find("3,1,0.5,4,1,0.25,"), std::string::npos);
}

TEST(Export, ComparisonReport) {
  std::vector<MapMetrics> a{{3, 10, 2.0, 5.0}, {4, 12, 3.0, 6.0}, {5, 11, std::nullopt, 5.5}};
  const auto cmp = compare_groups(a, a);
  ASSERT_EQ(cmp.size(), 4u);
  for (const auto& c : cmp) EXPECT_DOUBLE_EQ(c.a12, 0.5);
  const auto j = comparison_json(cmp);
  EXPECT_DOUBLE_EQ(j["FC"]["group_a"]["mean"].get<double>(), 11.0);
  EXPECT_DOUBLE_EQ(j["MS"]["group_a"]["values"][2].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j["MM"]["p"].get<double>(), 1.0);
}
