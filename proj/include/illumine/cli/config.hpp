#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/core/archive.hpp"
#include "illumine/core/search.hpp"
#include "illumine/digit/domain.hpp"
#include "illumine/road/domain.hpp"
#include "illumine/sut/driver.hpp"
#include "illumine/util/error.hpp"

namespace illumine::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kMnistEnv = "ILLUMINE_MNIST_DIR";

/// Bad flags, config or inputs: exit code 2.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing dataset, model or SUT process: exit code 3.
class EnvironmentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Values given on the command line; each overrides the config file.
struct RunFlags {
  std::optional<fs::path> config_file;
  std::optional<std::string> domain;
  std::optional<std::vector<std::string>> features;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> budget;
  std::optional<fs::path> out;
  std::optional<std::size_t> workers;
  std::optional<fs::path> model;
  std::optional<fs::path> mnist_dir;
  std::optional<std::string> sut_command;
};

/// Everything a run needs, after flag > file > default resolution.
struct RunPlan {
  std::string domain;
  SearchConfig search;
  fs::path out;

  std::string sut_kind = "builtin"; ///< "builtin" or "external"
  fs::path model;                   ///< builtin digit classifier
  std::string command;              ///< external SUT
  std::int64_t timeout_ms = 60000;

  int label = 5;
  fs::path mnist_dir;

  road::SeedOptions road_seed;
  road::GeometryOptions road_geometry;
  sut::DriverParams driver;
  std::uint64_t noise_seed = 0;

  /// Resolved configuration as recorded in config.json.
  json snapshot() const;
  std::string sut_id() const;
};

/// "20000" = evaluations, "3600s" = wall-clock seconds.
inline Budget parse_budget(const std::string& text) {
  if (text.empty()) throw UsageError("empty budget");
  const bool seconds = text.back() == 's';
  const std::string number = seconds ? text.substr(0, text.size() - 1) : text;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(number, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != number.size() || number.empty() || !(value >= 0.0))
    throw UsageError("budget must be a non-negative count or seconds with an 's' suffix, got '" + text + "'");
  if (!seconds && value != static_cast<double>(static_cast<std::uint64_t>(value)))
    throw UsageError("evaluation budget must be an integer, got '" + text + "'");
  return seconds ? Budget::seconds(value) : Budget::evaluations(static_cast<std::uint64_t>(value));
}

inline json budget_json(const Budget& b) {
  if (b.kind == Budget::Kind::Seconds) return {{"seconds", b.amount}};
  return {{"evaluations", static_cast<std::uint64_t>(b.amount)}};
}

inline Budget budget_from_json(const json& j) {
  if (j.is_string()) return parse_budget(j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) return Budget::evaluations(j.get<std::uint64_t>());
  if (j.is_object() && j.contains("evaluations")) return Budget::evaluations(j["evaluations"].get<std::uint64_t>());
  if (j.is_object() && j.contains("seconds")) return Budget::seconds(j["seconds"].get<double>());
  throw UsageError("budget must be {\"evaluations\": N}, {\"seconds\": S} or a string");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline const std::vector<std::string>& valid_features(const std::string& domain) {
  return domain == "digit" ? digit::feature_names() : road::feature_names();
}

inline void check_features(const std::string& domain, const std::vector<std::string>& features) {
  if (features.empty()) throw UsageError("no feature metrics given");
  const auto& valid = valid_features(domain);
  for (const auto& f : features) {
    if (std::find(valid.begin(), valid.end(), f) != valid.end()) continue;
    std::string list;
    for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
    throw UsageError("unknown feature '" + f + "' for domain " + domain + "; valid metrics: " + list);
  }
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = i + 1; j < features.size(); ++j)
      if (features[i] == features[j]) throw UsageError("feature '" + features[i] + "' given twice");
}

inline double default_scale(const std::string& domain, const std::string& feature) {
  return domain == "digit" ? digit::default_scale(feature) : road::default_scale(feature);
}

inline std::optional<fs::path> mnist_from_env() {
  if (const char* v = std::getenv(kMnistEnv); v && *v) return fs::path(v);
  return std::nullopt;
}

/// Reads `key` from a JSON object with a type check that reports the key.
template <typename T>
std::optional<T> lookup(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return std::nullopt;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config: '") + key + "' has the wrong type");
  }
}

inline RunPlan resolve_run(const RunFlags& flags, SearchMode mode) {
  json file = json::object();
  if (flags.config_file) {
    try {
      file = json::parse(read_text(*flags.config_file));
    } catch (const json::exception& e) {
      throw UsageError("config file " + flags.config_file->string() + " does not parse: " + e.what());
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
  }

  RunPlan plan;
  plan.domain = flags.domain ? *flags.domain : lookup<std::string>(file, "domain").value_or("");
  if (plan.domain != "digit" && plan.domain != "road")
    throw UsageError(plan.domain.empty() ? "no domain given (--domain digit|road)"
                                         : "unknown domain '" + plan.domain + "' (expected digit or road)");
  const bool digit = plan.domain == "digit";

  SearchConfig& s = plan.search;
  s.mode = mode;
  s.features = flags.features ? *flags.features
                              : lookup<std::vector<std::string>>(file, "features")
                                    .value_or(digit ? std::vector<std::string>{"Mov", "Lum"}
                                                    : std::vector<std::string>{"MLP", "StdSA"});
  check_features(plan.domain, s.features);

  const json scales = file.value("grid_scale_factors", json::object());
  for (const auto& f : s.features) {
    const auto given = lookup<double>(scales, f.c_str());
    s.grid_scale_factors.push_back(given ? *given : default_scale(plan.domain, f));
  }

  s.rng_seed = flags.seed ? *flags.seed : lookup<std::uint64_t>(file, "seed").value_or(0);
  if (flags.budget) {
    s.budget = parse_budget(*flags.budget);
  } else if (file.contains("budget")) {
    try {
      s.budget = budget_from_json(file["budget"]);
    } catch (const json::exception&) {
      throw UsageError("config: 'budget' has the wrong type");
    }
  } else {
    s.budget = Budget::evaluations(digit ? 20000 : 200);
  }
  s.seed_pool_size = lookup<std::size_t>(file, "seed_pool_size").value_or(digit ? 900 : 40);
  s.population_size = lookup<std::size_t>(file, "population_size").value_or(digit ? 800 : 24);
  const json mutation = file.value("mutation", json::object());
  s.mutation_lower_bound = lookup<double>(mutation, "lower").value_or(digit ? 0.01 : 1.0);
  s.mutation_upper_bound = lookup<double>(mutation, "upper").value_or(digit ? 0.6 : 6.0);
  s.workers = flags.workers ? *flags.workers : lookup<std::size_t>(file, "workers").value_or(1);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (!(s.mutation_lower_bound > 0.0)) throw UsageError("mutation lower bound must be positive");

  plan.out = flags.out ? *flags.out : fs::path(lookup<std::string>(file, "out").value_or("run"));

  const json sut = file.value("sut", json::object());
  if (flags.sut_command) {
    plan.sut_kind = "external";
    plan.command = *flags.sut_command;
  } else {
    plan.sut_kind = lookup<std::string>(sut, "kind").value_or("builtin");
    plan.command = lookup<std::string>(sut, "command").value_or("");
  }
  if (plan.sut_kind != "builtin" && plan.sut_kind != "external")
    throw UsageError("sut.kind must be builtin or external");
  if (plan.sut_kind == "external" && plan.command.empty()) throw UsageError("external SUT needs a command");
  plan.timeout_ms = static_cast<std::int64_t>(lookup<double>(sut, "timeout_s").value_or(60.0) * 1000.0);
  if (flags.model) plan.model = *flags.model;
  else if (auto m = lookup<std::string>(sut, "model")) plan.model = *m;

  if (digit) {
    const json d = file.value("digit", json::object());
    plan.label = lookup<int>(d, "label").value_or(5);
    if (plan.label < 0 || plan.label > 9) throw UsageError("digit.label must be 0-9");
    if (flags.mnist_dir) plan.mnist_dir = *flags.mnist_dir;
    else if (auto m = lookup<std::string>(d, "mnist_dir")) plan.mnist_dir = *m;
    else if (auto env = mnist_from_env()) plan.mnist_dir = *env;
  } else {
    const json r = file.value("road", json::object());
    plan.road_seed.lane_width = lookup<double>(r, "lane_width").value_or(plan.road_seed.lane_width);
    plan.road_seed.control_points = lookup<std::size_t>(r, "seed_points").value_or(plan.road_seed.control_points);
    plan.road_seed.step = lookup<double>(r, "seed_step").value_or(plan.road_seed.step);
    plan.road_seed.max_turn_deg = lookup<double>(r, "seed_max_turn_deg").value_or(plan.road_seed.max_turn_deg);
    plan.road_geometry.box_size = lookup<double>(r, "box_size").value_or(plan.road_geometry.box_size);
    plan.road_geometry.samples_per_segment =
        lookup<int>(r, "samples_per_segment").value_or(plan.road_geometry.samples_per_segment);
    plan.road_geometry.waypoint_spacing =
        lookup<double>(r, "waypoint_spacing").value_or(plan.road_geometry.waypoint_spacing);
    if (!(plan.road_seed.lane_width > 0.0)) throw UsageError("road.lane_width must be positive");
    if (plan.road_seed.control_points < 4) throw UsageError("road.seed_points must be at least 4");
    if (file.contains("driver")) {
      try {
        plan.driver = sut::driver_params_from_json(file["driver"]);
      } catch (const json::exception&) {
        throw UsageError("config: 'driver' has the wrong shape");
      }
      plan.noise_seed = lookup<std::uint64_t>(file["driver"], "noise_seed").value_or(0);
    }
  }
  return plan;
}

inline std::string RunPlan::sut_id() const {
  if (sut_kind == "external") return "external:" + command;
  return domain == "digit" ? "builtin-mlp" : "builtin-driver";
}

inline json RunPlan::snapshot() const {
  json j;
  j["domain"] = domain;
  j["mode"] = search.mode == SearchMode::Baseline ? "baseline" : "illumination";
  j["features"] = search.features;
  json scales = json::object();
  for (std::size_t i = 0; i < search.features.size(); ++i) scales[search.features[i]] = search.grid_scale_factors[i];
  j["grid_scale_factors"] = scales;
  j["seed"] = search.rng_seed;
  j["budget"] = budget_json(search.budget);
  j["seed_pool_size"] = search.seed_pool_size;
  j["population_size"] = search.population_size;
  j["mutation"] = {{"lower", search.mutation_lower_bound}, {"upper", search.mutation_upper_bound}};
  j["workers"] = search.workers;
  json sut = {{"kind", sut_kind}, {"id", sut_id()}};
  if (sut_kind == "external") {
    sut["command"] = command;
    sut["timeout_s"] = static_cast<double>(timeout_ms) / 1000.0;
  } else if (domain == "digit") {
    sut["model"] = model.string();
  }
  j["sut"] = sut;
  if (domain == "digit") {
    j["digit"] = {{"label", label}, {"mnist_dir", mnist_dir.string()}};
  } else {
    j["road"] = {{"lane_width", road_seed.lane_width},
                 {"seed_points", road_seed.control_points},
                 {"seed_step", road_seed.step},
                 {"seed_max_turn_deg", road_seed.max_turn_deg},
                 {"box_size", road_geometry.box_size},
                 {"samples_per_segment", road_geometry.samples_per_segment},
                 {"waypoint_spacing", road_geometry.waypoint_spacing}};
    json d = sut::to_json(driver);
    d["noise_seed"] = noise_seed;
    j["driver"] = d;
  }
  return j;
}

} // namespace illumine::cli
