#pragma once

#include <chrono>
#include <concepts>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "illumine/core/feature_map.hpp"
#include "illumine/core/individual.hpp"
#include "illumine/core/population.hpp"
#include "illumine/util/error.hpp"
#include "illumine/util/rng.hpp"

namespace illumine {

struct Budget {
  enum class Kind { Evaluations, Seconds };
  Kind kind = Kind::Evaluations;
  double amount = 0.0;

  static Budget evaluations(std::uint64_t n) { return {Kind::Evaluations, static_cast<double>(n)}; }
  static Budget seconds(double s) { return {Kind::Seconds, s}; }
};

enum class SearchMode {
  Illumination, ///< parents drawn uniformly from the occupied map cells
  Baseline,     ///< parents drawn uniformly from the seed pool (random-search control)
};

struct SearchConfig {
  std::size_t seed_pool_size = 1;
  std::size_t population_size = 1;
  Budget budget = Budget::evaluations(0);
  double mutation_lower_bound = 0.0;
  double mutation_upper_bound = 1.0;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> features;
  std::vector<double> grid_scale_factors;
  SearchMode mode = SearchMode::Illumination;
  std::size_t workers = 1;
  std::size_t reselect_limit = 1000;

  void validate() const {
    if (population_size < 1) throw ConfigError("population size must be at least 1");
    if (seed_pool_size < population_size) throw ConfigError("seed pool size must be >= population size");
    if (!(mutation_lower_bound < mutation_upper_bound))
      throw ConfigError("mutation lower bound must be below the upper bound");
    if (!(budget.amount >= 0.0)) throw ConfigError("budget must be non-negative");
    if (features.empty()) throw ConfigError("at least one feature metric is required");
    if (grid_scale_factors.size() != features.size())
      throw ConfigError("one grid scale factor per feature is required");
    for (double a : grid_scale_factors)
      if (!(a > 0.0)) throw ConfigError("grid scale factors must be positive");
    if (workers < 1) throw ConfigError("workers must be at least 1");
  }
};

/// What a domain must provide to be searched.
///
/// mutate() throws MutationExhausted when no valid, parent-distinct mutant
/// can be produced. evaluate() may throw FeatureUndefined or SutError; the
/// individual is then discarded. evaluate() is called concurrently with
/// distinct worker indices when more than one worker is configured.
template <typename D>
concept SearchDomain = requires(D& d, const typename D::genome_type& g, Rng& rng, std::size_t n,
                                double bound) {
  typename D::genome_type;
  { d.generate_seeds(n, rng) } -> std::same_as<std::vector<typename D::genome_type>>;
  { d.mutate(g, bound, bound, rng) } -> std::same_as<typename D::genome_type>;
  { d.evaluate(g, n) } -> std::same_as<Evaluation>;
};

struct SearchStats {
  std::size_t seeds_generated = 0;
  std::size_t seeds_valid = 0;
  std::uint64_t evaluations = 0; ///< loop evaluations, discarded ones included
  std::uint64_t discarded = 0;
  std::uint64_t mutation_reselections = 0;
  double elapsed_seconds = 0.0;
};

template <typename Genome>
struct SearchResult {
  std::vector<EvaluationRecord> log;
  FeatureMap<Individual<Genome>> map;
  SearchStats stats;
};

template <typename Genome>
using LogSink = std::function<void(const EvaluationRecord&, const Genome&)>;

namespace detail {

template <typename Genome>
struct EvalOutcome {
  std::optional<Evaluation> evaluation;
  std::string error;
};

template <SearchDomain D>
EvalOutcome<typename D::genome_type> evaluate_guarded(D& domain, const typename D::genome_type& g,
                                                      std::size_t worker) {
  try {
    return {domain.evaluate(g, worker), {}};
  } catch (const FeatureUndefined& e) {
    return {std::nullopt, e.what()};
  } catch (const SutError& e) {
    return {std::nullopt, e.what()};
  }
}

} // namespace detail

/// MAP-Elites illumination loop.
///
/// Seeds are generated and evaluated, a max-min diverse population is
/// mapped, then the loop selects, mutates, evaluates and updates the map
/// until the budget is spent. Every mapped individual is appended to the
/// returned log (and passed to `sink`) in the order it reached the map.
template <SearchDomain D>
SearchResult<typename D::genome_type> run_search(const SearchConfig& config, D& domain,
                                                 const LogSink<typename D::genome_type>& sink = {}) {
  using Genome = typename D::genome_type;
  using Ind = Individual<Genome>;
  config.validate();

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  Rng rng(config.rng_seed);
  SearchResult<Genome> result;
  std::uint64_t next_id = 0;

  auto make_individual = [&](Genome g, Evaluation ev, std::optional<std::uint64_t> parent) {
    Ind ind{std::move(g), {}};
    ind.record.id = next_id++;
    ind.record.parent_id = parent;
    ind.record.coords = map_coordinates(ev.features, config.grid_scale_factors, config.features);
    ind.record.features = std::move(ev.features);
    ind.record.fitness = ev.fitness;
    ind.record.input_digest = std::move(ev.input_digest);
    return ind;
  };
  auto log_and_map = [&](const Ind& ind) {
    result.log.push_back(ind.record);
    if (sink) sink(ind.record, ind.genome);
    result.map.update(ind);
  };

  std::vector<Genome> raw_seeds;
  try {
    raw_seeds = domain.generate_seeds(config.seed_pool_size, rng);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("seed generation failed: ") + e.what());
  }
  result.stats.seeds_generated = raw_seeds.size();

  std::vector<Ind> seeds;
  for (Genome& g : raw_seeds) {
    auto outcome = detail::evaluate_guarded(domain, g, 0);
    if (!outcome.evaluation) continue;
    seeds.push_back(make_individual(std::move(g), std::move(*outcome.evaluation), std::nullopt));
  }
  result.stats.seeds_valid = seeds.size();
  if (seeds.size() < config.population_size)
    throw std::runtime_error("only " + std::to_string(seeds.size()) + " of " +
                             std::to_string(raw_seeds.size()) +
                             " seeds could be evaluated; population size is " +
                             std::to_string(config.population_size));

  for (const Ind& ind : initialise_population(seeds, config.population_size, rng)) log_and_map(ind);

  auto budget_left = [&]() -> std::uint64_t {
    if (config.budget.kind == Budget::Kind::Seconds)
      return elapsed() < config.budget.amount ? config.workers : 0;
    const auto total = static_cast<std::uint64_t>(config.budget.amount);
    return total > result.stats.evaluations ? total - result.stats.evaluations : 0;
  };

  struct Pending {
    Genome genome;
    std::uint64_t parent_id;
  };

  while (const std::uint64_t left = budget_left()) {
    const std::size_t batch = static_cast<std::size_t>(std::min<std::uint64_t>(left, config.workers));

    std::vector<Pending> pending;
    pending.reserve(batch);
    std::size_t consecutive_failures = 0;
    while (pending.size() < batch) {
      const Ind& parent = config.mode == SearchMode::Illumination
                              ? result.map.random_selection(rng)
                              : seeds[rng.below(seeds.size())];
      try {
        pending.push_back({domain.mutate(parent.genome, config.mutation_lower_bound,
                                         config.mutation_upper_bound, rng),
                           parent.record.id});
        consecutive_failures = 0;
      } catch (const MutationExhausted&) {
        ++result.stats.mutation_reselections;
        if (++consecutive_failures >= config.reselect_limit)
          throw std::runtime_error("no parent in the map could be mutated after " +
                                   std::to_string(config.reselect_limit) + " reselections");
      }
    }

    std::vector<detail::EvalOutcome<Genome>> outcomes(batch);
    if (batch == 1) {
      outcomes[0] = detail::evaluate_guarded(domain, pending[0].genome, 0);
    } else {
      std::vector<std::future<detail::EvalOutcome<Genome>>> futures;
      futures.reserve(batch);
      for (std::size_t w = 0; w < batch; ++w)
        futures.push_back(std::async(std::launch::async, [&domain, &pending, w] {
          return detail::evaluate_guarded(domain, pending[w].genome, w);
        }));
      for (std::size_t w = 0; w < batch; ++w) outcomes[w] = futures[w].get();
    }

    // Merge in submission order.
    for (std::size_t w = 0; w < batch; ++w) {
      ++result.stats.evaluations;
      if (!outcomes[w].evaluation) {
        ++result.stats.discarded;
        continue;
      }
      log_and_map(make_individual(std::move(pending[w].genome), std::move(*outcomes[w].evaluation),
                                  pending[w].parent_id));
    }
  }

  result.stats.elapsed_seconds = elapsed();
  return result;
}

/// Rebuilds a map from an evaluation log.
inline FeatureMap<LoggedEntry> replay_log(const std::vector<EvaluationRecord>& log) {
  FeatureMap<LoggedEntry> map;
  for (const EvaluationRecord& r : log) map.update(LoggedEntry{r});
  return map;
}

} // namespace illumine
