#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/core/feature_map.hpp"
#include "illumine/core/individual.hpp"

namespace illumine {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline json to_json(const EvaluationRecord& r) {
  json j;
  j["id"] = r.id;
  j["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
  j["features"] = r.features;
  j["fitness"] = r.fitness;
  j["coords"] = r.coords;
  j["misbehaviour"] = r.misbehaviour();
  j["input_digest"] = r.input_digest;
  return j;
}

inline EvaluationRecord record_from_json(const json& j) {
  EvaluationRecord r;
  r.id = j.at("id").get<std::uint64_t>();
  if (!j.at("parent_id").is_null()) r.parent_id = j.at("parent_id").get<std::uint64_t>();
  r.features = j.at("features").get<std::vector<double>>();
  r.fitness = j.at("fitness").get<double>();
  r.coords = j.at("coords").get<Coords>();
  r.input_digest = j.at("input_digest").get<std::string>();
  if (j.at("misbehaviour").get<bool>() != r.misbehaviour())
    throw std::runtime_error("evaluation " + std::to_string(r.id) + ": misbehaviour flag disagrees with fitness");
  return r;
}

/// Deterministic snapshot of a map: cells in coordinate order.
///
/// `elite_payload`, when given, attaches extra JSON to each cell (the elite
/// genome in written archives).
template <MapEntry E>
json map_snapshot(const FeatureMap<E>& map, const std::vector<std::string>& features,
                  const std::function<std::uint64_t(const E&)>& elite_id,
                  const std::function<json(const E&)>& elite_payload = {}) {
  json j;
  j["features"] = features;
  json ranges = json::array();
  for (auto [lo, hi] : map.ranges()) ranges.push_back({lo, hi});
  j["ranges"] = ranges;
  j["range_cells"] = map.range_cell_count();
  json cells = json::array();
  for (const auto& [coords, cell] : map.cells()) {
    json c;
    c["coords"] = coords;
    c["elite_id"] = elite_id(cell.elite);
    c["elite_fitness"] = cell.elite.fitness();
    c["total_evals"] = cell.total_evals;
    c["misbehaving_evals"] = cell.misbehaving_evals;
    if (elite_payload) c["elite_genome"] = elite_payload(cell.elite);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Streams a run to disk as it happens.
///
/// Layout: config.json, evaluations.jsonl (append-only, one record per
/// line), map.json (written by finish()), inputs/<id>.<ext> per logged
/// individual.
template <typename Genome>
class ArchiveWriter {
public:
  using InputWriter = std::function<void(const Genome&, const fs::path& stem)>;

  ArchiveWriter(fs::path dir, const json& config, InputWriter write_input)
      : dir_(std::move(dir)), write_input_(std::move(write_input)) {
    fs::create_directories(dir_ / "inputs");
    write_text(dir_ / "config.json", config.dump(2) + "\n");
    log_.open(dir_ / "evaluations.jsonl", std::ios::binary | std::ios::trunc);
    if (!log_) throw std::runtime_error("cannot write " + (dir_ / "evaluations.jsonl").string());
  }

  void append(const EvaluationRecord& r, const Genome& g) {
    log_ << to_json(r).dump() << '\n';
    if (write_input_) write_input_(g, dir_ / "inputs" / std::to_string(r.id));
  }

  template <MapEntry E>
  void finish(const FeatureMap<E>& map, const std::vector<std::string>& features,
              const std::function<std::uint64_t(const E&)>& elite_id,
              const std::function<json(const E&)>& elite_payload) {
    log_.flush();
    write_text(dir_ / "map.json", map_snapshot(map, features, elite_id, elite_payload).dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

private:
  fs::path dir_;
  InputWriter write_input_;
  std::ofstream log_;
};

/// A run archive read back from disk.
struct LoadedArchive {
  fs::path dir;
  json config;
  json map;
  std::vector<EvaluationRecord> log;

  std::vector<std::string> features() const { return config.at("features").get<std::vector<std::string>>(); }
  std::string domain() const { return config.value("domain", std::string{}); }
  std::string run_id() const { return dir.filename().string(); }
};

inline LoadedArchive load_archive(const fs::path& dir) {
  LoadedArchive a;
  a.dir = fs::weakly_canonical(dir);
  if (a.dir.filename().empty()) a.dir = a.dir.parent_path();
  a.config = json::parse(read_text(dir / "config.json"));
  a.map = json::parse(read_text(dir / "map.json"));
  std::ifstream in(dir / "evaluations.jsonl", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + (dir / "evaluations.jsonl").string());
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) a.log.push_back(record_from_json(json::parse(line)));
  return a;
}

/// Strips per-cell genome payloads so snapshots can be compared with a replay.
inline json strip_payloads(json snapshot) {
  for (auto& c : snapshot.at("cells")) c.erase("elite_genome");
  return snapshot;
}

} // namespace illumine
