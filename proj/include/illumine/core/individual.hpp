#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "illumine/core/feature_map.hpp"

namespace illumine {

/// Result of evaluating one concretized input against the system under test.
struct Evaluation {
  std::vector<double> features;
  double fitness = 0.0;
  std::string input_digest;
};

/// One line of the evaluation log: everything about an individual except
/// its genome.
struct EvaluationRecord {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent_id;
  std::vector<double> features;
  double fitness = 0.0;
  Coords coords;
  std::string input_digest;

  bool misbehaviour() const { return fitness < 0.0; }
};

/// Map entry backed by a log record only (replay, analytics).
struct LoggedEntry {
  EvaluationRecord record;

  double fitness() const { return record.fitness; }
  bool misbehaviour() const { return record.misbehaviour(); }
  const Coords& coords() const { return record.coords; }
};

template <typename Genome>
struct Individual {
  Genome genome;
  EvaluationRecord record;

  double fitness() const { return record.fitness; }
  bool misbehaviour() const { return record.misbehaviour(); }
  const Coords& coords() const { return record.coords; }
};

} // namespace illumine
