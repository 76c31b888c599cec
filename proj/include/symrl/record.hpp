#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace symrl {

struct EpisodeRow {
  std::size_t episode = 0;
  double ret = 0.0;         // V_1^{pi_t}(s_1^t), exact where the model allows it
  double v_star = 0.0;      // V_1^*(s_1^t)
  double regret = 0.0;      // v_star - ret
  double cum_regret = 0.0;  // running sum of regret
  double ms = 0.0;          // wall-clock per episode, 0 unless timing is enabled
};

struct RunMetadata {
  std::string env;
  std::string algorithm;
  std::string kernel;
  double beta = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

struct EvaluationRow {
  std::size_t episode = 0;
  double mean_return = 0.0;
};

struct ExperimentRecord {
  RunMetadata meta;
  std::vector<EpisodeRow> rows;
  std::vector<EvaluationRow> evaluations;
  std::optional<double> best_objective;
  std::size_t factorization_fallbacks = 0;

  /// Appends a row, maintaining the running regret sum.
  void add(double ret, double v_star, double ms);
  double cumulative_regret() const noexcept { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

}  // namespace symrl
