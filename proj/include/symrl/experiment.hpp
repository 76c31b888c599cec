#pragma once

// Seed suites, CSV and metadata output, aggregation, and held-out
// evaluation on random FrozenLake layouts.

#include "symrl/config.hpp"
#include "symrl/record.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace symrl {

enum class Algorithm { kovi, tabular };

/// Mean return of `policy` over `n_test` solvable random layouts drawn from
/// the "eval" stream of `seed`. Layouts depend only on (n_test, seed).
double evaluate_test_envs(const PolicyFn& policy, std::size_t n_test, std::uint64_t seed,
                          int horizon = 10);

/// One run. KOVI runs build a fresh environment instance per seed;
/// frozen_random runs also record held-out evaluations.
ExperimentRecord run_single(const Config& config, Algorithm algorithm, std::uint64_t seed);

struct AggregateRow {
  std::size_t episode = 0;
  double mean_cum_regret = 0.0;
  double stderr_cum_regret = 0.0;  // sample sd / sqrt(n); 0 when n = 1
  std::size_t n_seeds = 0;
};

/// Per-episode mean and standard error of cumulative regret. Records must
/// have equal lengths.
std::vector<AggregateRow> aggregate(std::span<const ExperimentRecord> records);

std::string record_csv(const ExperimentRecord& record);
std::string aggregate_csv(std::span<const AggregateRow> rows);
std::string evaluation_csv(const ExperimentRecord& record);
std::string metadata_json(const ExperimentRecord& record);

struct SuiteResult {
  std::vector<std::uint64_t> seeds;
  std::vector<std::optional<ExperimentRecord>> records;  // parallel to seeds
  std::vector<std::string> errors;                        // "seed N: message"

  std::vector<ExperimentRecord> completed() const;
  bool ok() const noexcept { return errors.empty(); }
};

/// Runs every seed, up to `jobs` at a time, and writes into `out`:
/// <name>_seed<k>.csv, <name>_seed<k>.json, <name>_seed<k>_eval.csv when
/// evaluations exist, and <name>_aggregate.csv over the completed runs.
/// A failing seed is recorded and the suite carries on.
SuiteResult run_suite(const Config& config, Algorithm algorithm,
                      std::span<const std::uint64_t> seeds, const std::filesystem::path& out,
                      int jobs = 1);

/// Seeds "a..b" (inclusive) or a single "a".
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

/// Output stem: the config name, or <algorithm>_<env>.
std::string suite_name(const Config& config, Algorithm algorithm);

}  // namespace symrl
