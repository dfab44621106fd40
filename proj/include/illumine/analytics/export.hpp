#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/analytics/grid.hpp"
#include "illumine/analytics/metrics.hpp"
#include "illumine/analytics/stats.hpp"

namespace illumine::analytics {

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// One row per occupied cell: coordinates, elite fitness, counters, MP, CI, highlight.
inline std::string cells_csv(const GridMap& m, double z = 1.96) {
  std::ostringstream out;
  for (const auto& f : m.features) out << f << ',';
  out << "elite_fitness,total_evals,misbehaving_evals,mp,ci_low,ci_high,highlighted\n";
  for (const auto& p : probability_map(m, z)) {
    for (int c : p.coords) out << c << ',';
    out << format_real(m.cells.at(p.coords).elite_fitness) << ',' << p.total << ',' << p.misbehaving << ','
        << format_real(p.mp) << ',' << format_real(p.ci_low) << ',' << format_real(p.ci_high) << ','
        << (p.highlighted ? "true" : "false") << '\n';
  }
  return out.str();
}

inline nlohmann::json metrics_json(const MapMetrics& m) {
  nlohmann::json j;
  j["MM"] = m.mm;
  j["FC"] = m.fc;
  j["MS"] = m.ms ? nlohmann::json(*m.ms) : nlohmann::json(nullptr);
  j["CS"] = m.cs ? nlohmann::json(*m.cs) : nlohmann::json(nullptr);
  return j;
}

/// Values of one metric across a group of runs. A missing sparseness (no
/// cell in the set) counts as 0, the value a single cell would give.
inline std::vector<double> metric_values(const std::vector<MapMetrics>& runs, const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : runs) {
    if (metric == "MM") v.push_back(static_cast<double>(r.mm));
    else if (metric == "FC") v.push_back(static_cast<double>(r.fc));
    else if (metric == "MS") v.push_back(r.ms.value_or(0.0));
    else if (metric == "CS") v.push_back(r.cs.value_or(0.0));
    else throw std::invalid_argument("unknown map metric " + metric);
  }
  return v;
}

struct GroupComparison {
  std::string metric;
  std::vector<double> a, b;
  MannWhitney test;
  double a12 = 0.5;
};

inline std::vector<GroupComparison> compare_groups(const std::vector<MapMetrics>& a, const std::vector<MapMetrics>& b) {
  std::vector<GroupComparison> out;
  for (const char* metric : {"MM", "MS", "FC", "CS"}) {
    GroupComparison c;
    c.metric = metric;
    c.a = metric_values(a, metric);
    c.b = metric_values(b, metric);
    c.test = mann_whitney_u(c.a, c.b);
    c.a12 = vargha_delaney_a12(c.a, c.b);
    out.push_back(std::move(c));
  }
  return out;
}

inline nlohmann::json comparison_json(const std::vector<GroupComparison>& cmp) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : cmp) {
    j[c.metric] = {
        {"group_a", {{"values", c.a}, {"mean", mean(c.a)}, {"sd", sample_sd(c.a)}, {"median", median(c.a)}}},
        {"group_b", {{"values", c.b}, {"mean", mean(c.b)}, {"sd", sample_sd(c.b)}, {"median", median(c.b)}}},
        {"U", c.test.u},
        {"p", c.test.p},
        {"A12", c.a12},
    };
  }
  return j;
}

} // namespace illumine::analytics
