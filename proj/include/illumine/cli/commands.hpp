#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/analytics/export.hpp"
#include "illumine/analytics/grid.hpp"
#include "illumine/analytics/metrics.hpp"
#include "illumine/analytics/stats.hpp"
#include "illumine/cli/config.hpp"
#include "illumine/core/archive.hpp"
#include "illumine/core/search.hpp"
#include "illumine/digit/domain.hpp"
#include "illumine/digit/mnist.hpp"
#include "illumine/report/gallery.hpp"
#include "illumine/report/heatmap.hpp"
#include "illumine/road/domain.hpp"
#include "illumine/sut/classifier.hpp"
#include "illumine/sut/external.hpp"
#include "illumine/util/hash.hpp"

namespace illumine::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kEnvironment = 3 };

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs `body`, translating the error taxonomy into exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << '\n';
    return kEnvironment;
  } catch (const SutError& e) {
    err << "error: " << e.what() << '\n';
    return kEnvironment;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

inline sut::ClassifierModel load_model(const fs::path& path) {
  if (path.empty()) throw EnvironmentError("the built-in digit SUT needs a trained model (--model, see 'illumine train')");
  try {
    return sut::model_from_json(json::parse(read_text(path)));
  } catch (const std::exception& e) {
    throw EnvironmentError("cannot load model " + path.string() + ": " + e.what());
  }
}

/// Test-set images of `label`, topped up from the training set when `needed` exceeds them.
inline std::vector<digit::RasterDigit> digit_seed_pool(const fs::path& mnist_dir, int label, std::size_t needed) {
  if (mnist_dir.empty())
    throw EnvironmentError(std::string("no MNIST directory (--mnist, digit.mnist_dir or ") + kMnistEnv + ")");
  if (!digit::mnist_available(mnist_dir)) throw EnvironmentError("MNIST files not found in " + mnist_dir.string());
  digit::Mnist m;
  try {
    m = digit::load_mnist(mnist_dir);
  } catch (const std::exception& e) {
    throw EnvironmentError(e.what());
  }
  std::vector<digit::RasterDigit> pool;
  for (std::size_t i = 0; i < m.test.images.size(); ++i)
    if (m.test.labels[i] == label) pool.push_back(m.test.images[i]);
  for (std::size_t i = 0; i < m.train.images.size() && pool.size() < needed; ++i)
    if (m.train.labels[i] == label) pool.push_back(m.train.images[i]);
  return pool;
}

inline void write_manifest(const fs::path& path, const json& manifest) { write_text(path, manifest.dump(2) + "\n"); }

struct RunSummary {
  fs::path archive;
  SearchStats stats;
  std::size_t logged = 0;
  std::size_t cells = 0;
};

template <SearchDomain D, typename InputWriter, typename Payload>
RunSummary execute(const RunPlan& plan, D& domain, InputWriter write_input, Payload payload) {
  using Genome = typename D::genome_type;
  ArchiveWriter<Genome> writer(plan.out, plan.snapshot(), write_input);
  auto result = run_search(plan.search, domain, [&](const EvaluationRecord& r, const Genome& g) { writer.append(r, g); });
  using Ind = Individual<Genome>;
  writer.template finish<Ind>(result.map, plan.search.features, [](const Ind& i) { return i.record.id; },
                              [&](const Ind& i) { return payload(i.genome); });
  return {plan.out, result.stats, result.log.size(), result.map.size()};
}

/// run / baseline: search, archive and manifest.
inline int cmd_run(const RunFlags& flags, SearchMode mode, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const RunPlan plan = resolve_run(flags, mode);
    fs::create_directories(plan.out);
    const fs::path manifest_path = plan.out / "manifest.json";
    json manifest = {{"tool_version", kToolVersion},
                     {"command", mode == SearchMode::Baseline ? "baseline" : "run"},
                     {"config", plan.snapshot()},
                     {"domain", plan.domain},
                     {"sut", plan.sut_id()},
                     {"features", plan.search.features},
                     {"started_at", utc_timestamp()},
                     {"finished_at", nullptr},
                     {"archive", fs::absolute(plan.out).lexically_normal().string()},
                     {"status", "running"}};
    write_manifest(manifest_path, manifest);

    RunSummary summary;
    try {
      if (plan.domain == "digit") {
        std::unique_ptr<sut::ExternalSutPool> pool;
        sut::ClassifierModel model;
        digit::ClassifyFn classify;
        if (plan.sut_kind == "external") {
          pool = std::make_unique<sut::ExternalSutPool>(plan.command, plan.search.workers,
                                                        std::chrono::milliseconds(plan.timeout_ms));
          for (std::size_t w = 0; w < pool->size(); ++w) pool->at(w).classify(digit::RasterDigit{});
          classify = [p = pool.get()](const digit::RasterDigit& r, std::size_t w) { return p->at(w).classify(r); };
        } else {
          model = load_model(plan.model);
          classify = digit::builtin_classifier(model.net);
        }
        digit::DigitDomain domain(plan.search.features,
                                  digit_seed_pool(plan.mnist_dir, plan.label, plan.search.seed_pool_size), plan.label,
                                  classify);
        summary = execute(plan, domain, digit::write_raster, [](const digit::DigitGenome& g) { return digit::to_json(g); });
      } else {
        std::unique_ptr<sut::ExternalSutPool> pool;
        road::DriveFn drive;
        if (plan.sut_kind == "external") {
          pool = std::make_unique<sut::ExternalSutPool>(plan.command, plan.search.workers,
                                                        std::chrono::milliseconds(plan.timeout_ms));
          const road::RoadGenome probe{{{0.0, 0.0}, {25.0, 0.0}, {50.0, 0.0}, {75.0, 0.0}}, plan.road_seed.lane_width};
          for (std::size_t w = 0; w < pool->size(); ++w) pool->at(w).drive(probe);
          drive = [p = pool.get()](const road::RoadGenome& g, const road::RoadGeometry&, std::size_t w) {
            return p->at(w).drive(g);
          };
        } else {
          drive = road::builtin_driver(plan.driver, plan.noise_seed);
        }
        road::RoadDomain domain(plan.search.features, drive, plan.road_seed, plan.road_geometry);
        summary = execute(plan, domain, road::write_road, [](const road::RoadGenome& g) { return road::to_json(g); });
      }
    } catch (const SutError& e) {
      // only the launch probe can get here; evaluation errors discard the individual
      throw EnvironmentError(e.what());
    }

    manifest["finished_at"] = utc_timestamp();
    manifest["status"] = "ok";
    manifest["stats"] = {{"seeds_generated", summary.stats.seeds_generated},
                         {"seeds_valid", summary.stats.seeds_valid},
                         {"loop_evaluations", summary.stats.evaluations},
                         {"discarded", summary.stats.discarded},
                         {"mutation_reselections", summary.stats.mutation_reselections},
                         {"logged", summary.logged},
                         {"cells", summary.cells},
                         {"elapsed_seconds", summary.stats.elapsed_seconds}};
    write_manifest(manifest_path, manifest);
    out << "archive " << plan.out.string() << ": " << summary.logged << " mapped evaluations, " << summary.cells
        << " cells, " << summary.stats.discarded << " discarded\n";
    return static_cast<int>(kOk);
  });
}

inline std::vector<LoadedArchive> load_archives(const std::vector<fs::path>& dirs) {
  std::vector<LoadedArchive> out;
  for (const auto& d : dirs) {
    try {
      out.push_back(load_archive(d));
    } catch (const std::exception& e) {
      throw UsageError("cannot read archive " + d.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw UsageError("no archives given");
  for (const auto& a : out)
    if (a.features() != out.front().features())
      throw UsageError("archives map different feature sets: " + out.front().dir.string() + " vs " + a.dir.string());
  return out;
}

struct AnalyzeOptions {
  std::vector<fs::path> archives;
  int grid = 25;
  double z = 1.96;
  fs::path out = "analysis";
};

inline report::ThumbnailFn thumbnails_for(const LoadedArchive& a) {
  if (a.domain() == "digit") return report::digit_thumbnails(a.dir / "inputs");
  road::GeometryOptions opt;
  if (a.config.contains("road")) {
    opt.box_size = a.config["road"].value("box_size", opt.box_size);
    opt.samples_per_segment = a.config["road"].value("samples_per_segment", opt.samples_per_segment);
    opt.waypoint_spacing = a.config["road"].value("waypoint_spacing", opt.waypoint_spacing);
  }
  return report::road_thumbnails(a.dir / "inputs", opt);
}

inline json metrics_with_counts(const analytics::GridMap& m) {
  json j = analytics::metrics_json(analytics::map_metrics(m));
  std::size_t highlighted = 0;
  for (const auto& p : analytics::probability_map(m)) highlighted += p.highlighted;
  j["highlighted"] = highlighted;
  j["evaluations"] = m.total_evaluations();
  return j;
}

inline void write_map_reports(const analytics::GridMap& m, const std::string& run_id, const AnalyzeOptions& opt,
                              const report::ThumbnailFn* thumbs, std::ostream& err) {
  write_text(opt.out / (run_id + "_cells.csv"), analytics::cells_csv(m, opt.z));
  if (m.features.size() != 2) return;
  for (auto c : {report::Channel::EliteFitness, report::Channel::Probability, report::Channel::Evaluations})
    write_text(opt.out / report::heatmap_file_name(run_id, m, c),
               report::render_heatmap(m, {c, opt.z, 16, run_id}));
  if (thumbs) {
    std::vector<std::string> warnings;
    write_text(opt.out / (run_id + "_" + m.features[0] + "_" + m.features[1] + "_gallery.svg"),
               report::render_gallery(m, *thumbs, &warnings, run_id));
    for (const auto& w : warnings) err << "warning: " << run_id << ": " << w << '\n';
  }
}

/// analyze: shared rescaling, per-run metrics, CSV, heatmaps and galleries.
inline int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    if (opt.grid < 1 || opt.grid > 100) throw UsageError("--grid must be between 1 and 100");
    const auto archives = load_archives(opt.archives);
    std::set<std::string> ids;
    for (const auto& a : archives)
      if (!ids.insert(a.run_id()).second) throw UsageError("two archives share the run id '" + a.run_id() + "'");
    std::vector<analytics::GridMap> maps;
    try {
      maps = analytics::rescale_all(archives, opt.grid);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    fs::create_directories(opt.out);

    json summary;
    summary["grid"] = opt.grid;
    summary["z"] = opt.z;
    summary["features"] = archives.front().features();
    summary["lower"] = maps.front().lower;
    summary["upper"] = maps.front().upper;
    json runs = json::array();
    for (std::size_t i = 0; i < archives.size(); ++i) {
      const auto thumbs = thumbnails_for(archives[i]);
      write_map_reports(maps[i], archives[i].run_id(), opt, &thumbs, err);
      json r = metrics_with_counts(maps[i]);
      r["run_id"] = archives[i].run_id();
      runs.push_back(r);
      out << archives[i].run_id() << ": MM=" << r["MM"] << " FC=" << r["FC"] << " MS=" << r["MS"] << " CS=" << r["CS"]
          << " highlighted=" << r["highlighted"] << '\n';
    }
    summary["runs"] = runs;
    if (archives.size() > 1) {
      const analytics::GridMap combined = analytics::merge(maps);
      write_map_reports(combined, "combined", opt, nullptr, err);
      summary["combined"] = metrics_with_counts(combined);
      out << "combined: highlighted=" << summary["combined"]["highlighted"] << '\n';
    }
    write_text(opt.out / "summary.json", summary.dump(2) + "\n");
    return static_cast<int>(kOk);
  });
}

struct CompareOptions {
  std::vector<fs::path> group_a, group_b;
  int grid = 25;
  fs::path out; ///< JSON report; stdout only when empty
};

/// compare: MM, MS, FC, CS per run on a shared grid, then U, p and A12 between groups.
inline int cmd_compare(const CompareOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    if (opt.group_a.empty() || opt.group_b.empty()) throw UsageError("both groups need at least one archive");
    std::vector<fs::path> all = opt.group_a;
    all.insert(all.end(), opt.group_b.begin(), opt.group_b.end());
    const auto archives = load_archives(all);
    std::vector<analytics::GridMap> maps;
    try {
      maps = analytics::rescale_all(archives, opt.grid);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    std::vector<analytics::MapMetrics> a, b;
    for (std::size_t i = 0; i < maps.size(); ++i)
      (i < opt.group_a.size() ? a : b).push_back(analytics::map_metrics(maps[i]));
    const auto cmp = analytics::compare_groups(a, b);
    json report = analytics::comparison_json(cmp);
    report["grid"] = opt.grid;
    report["features"] = archives.front().features();
    json ga = json::array(), gb = json::array();
    for (std::size_t i = 0; i < archives.size(); ++i)
      (i < opt.group_a.size() ? ga : gb).push_back(archives[i].run_id());
    report["group_a_runs"] = ga;
    report["group_b_runs"] = gb;
    if (!opt.out.empty()) {
      if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
      write_text(opt.out, report.dump(2) + "\n");
    }
    for (const auto& c : cmp)
      out << c.metric << ": median A=" << analytics::format_real(analytics::median(c.a))
          << " B=" << analytics::format_real(analytics::median(c.b)) << " U=" << analytics::format_real(c.test.u)
          << " p=" << analytics::format_real(c.test.p) << " A12=" << analytics::format_real(c.a12) << '\n';
    return static_cast<int>(kOk);
  });
}

struct TrainFlags {
  std::optional<fs::path> mnist_dir;
  fs::path out = "model.json";
  sut::TrainOptions train;
};

inline int cmd_train(const TrainFlags& flags, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const auto dir = flags.mnist_dir ? flags.mnist_dir : mnist_from_env();
    if (!dir) throw EnvironmentError(std::string("no MNIST directory (--mnist or ") + kMnistEnv + ")");
    if (!digit::mnist_available(*dir)) throw EnvironmentError("MNIST files not found in " + dir->string());
    if (flags.train.epochs < 0 || flags.train.batch_size < 1 || !(flags.train.learning_rate > 0.0) ||
        flags.train.hidden < 1)
      throw UsageError("training options out of range");
    const auto m = digit::load_mnist(*dir);
    const auto model = sut::train_classifier(m.train.images, m.train.labels, m.test.images, m.test.labels, flags.train);
    if (flags.out.has_parent_path()) fs::create_directories(flags.out.parent_path());
    write_text(flags.out, sut::model_to_json(model).dump(2) + "\n");
    out << "model " << flags.out.string() << ": test accuracy " << analytics::format_real(model.info.test_accuracy)
        << '\n';
    return static_cast<int>(kOk);
  });
}

/// Comma-separated table with a header row and an id in the first column.
struct Table {
  std::vector<std::string> columns; ///< excluding the id column
  std::map<std::string, std::vector<double>> rows;
};

inline Table read_table(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  Table t;
  auto cells = [](const std::string& l) {
    std::vector<std::string> v;
    std::string cur;
    for (char c : l) {
      if (c == ',') {
        v.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    v.push_back(cur);
    return v;
  };
  if (!std::getline(in, line)) throw UsageError(path.string() + " is empty");
  auto header = cells(line);
  if (header.size() < 2) throw UsageError(path.string() + ": need an id column and at least one value column");
  t.columns.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto v = cells(line);
    if (v.size() != header.size())
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " fields");
    std::vector<double> values;
    for (std::size_t i = 1; i < v.size(); ++i) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(v[i], &used));
        if (used != v[i].size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw UsageError(path.string() + ":" + std::to_string(lineno) + ": '" + v[i] + "' is not a number");
      }
    }
    if (!t.rows.emplace(v[0], std::move(values)).second)
      throw UsageError(path.string() + ": duplicate id '" + v[0] + "'");
  }
  return t;
}

struct CorrelateOptions {
  fs::path labels, metrics;
  fs::path out; ///< CSV; stdout only when empty
  int resamples = analytics::kPermutationResamples;
};

/// correlate: Pearson r and permutation p of every metric column against every label column.
inline int cmd_correlate(const CorrelateOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    Table labels, metrics;
    try {
      labels = read_table(opt.labels);
      metrics = read_table(opt.metrics);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    std::vector<std::string> ids;
    for (const auto& [id, _] : labels.rows)
      if (metrics.rows.count(id)) ids.push_back(id);
    if (ids.size() < 3) throw UsageError("fewer than 3 ids appear in both tables");

    std::ostringstream csv;
    csv << "label,metric,n,r,p\n";
    for (std::size_t li = 0; li < labels.columns.size(); ++li)
      for (std::size_t mi = 0; mi < metrics.columns.size(); ++mi) {
        std::vector<double> xs, ys;
        for (const auto& id : ids) {
          xs.push_back(labels.rows.at(id)[li]);
          ys.push_back(metrics.rows.at(id)[mi]);
        }
        csv << labels.columns[li] << ',' << metrics.columns[mi] << ',' << ids.size() << ',';
        try {
          const auto c = analytics::pearson(xs, ys, opt.resamples);
          csv << analytics::format_real(c.r) << ',' << analytics::format_real(c.p) << '\n';
        } catch (const std::invalid_argument& e) {
          csv << ",\n";
          err << "warning: " << labels.columns[li] << " vs " << metrics.columns[mi] << ": " << e.what() << '\n';
        }
      }
    if (!opt.out.empty()) write_text(opt.out, csv.str());
    out << csv.str();
    return static_cast<int>(kOk);
  });
}

} // namespace illumine::cli
