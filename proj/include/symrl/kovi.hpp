#pragma once

// Kernel optimistic least-squares value iteration.

#include "symrl/envs.hpp"
#include "symrl/record.hpp"
#include "symrl/regression.hpp"

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace symrl {

struct KoviConfig {
  double beta = 0.1;
  double lambda = 0.01;
  KernelSpec kernel{KernelFamily::rbf, 1.0};
  std::size_t episodes = 100;
  bool timing = false;

  /// Throws std::invalid_argument for beta < 0, lambda <= 0 or no episodes.
  void validate() const;
};

/// min{max{mean + beta * std, 0}, cap}.
double optimistic_q(double mean, double std, double beta, double cap) noexcept;

/// Index of the largest value; ties go to the lowest index. Requires a
/// non-empty range.
std::size_t greedy_index(std::span<const double> values);

/// Optimistic Q_h for one step: the KRR posterior of that step, its probe
/// cache, beta and the cap H - h + 1.
class QEstimator {
 public:
  QEstimator(const Posterior& posterior, const ProbeCache& cache, double beta, double cap)
      : posterior_(&posterior), cache_(&cache), beta_(beta), cap_(cap) {}

  /// Fresh evaluation at an arbitrary joint embedding, O(t^2).
  double q_value(const Vector& z) const;
  /// Cached evaluation of a synced probe, O(t).
  double q_probe(std::size_t probe) const;

  double cap() const noexcept { return cap_; }
  const Posterior& posterior() const noexcept { return *posterior_; }

 private:
  const Posterior* posterior_;
  const ProbeCache* cache_;
  double beta_;
  double cap_;
};

class KoviAgent {
 public:
  KoviAgent(const EpisodicEnv& env, KoviConfig config);

  /// Backward pass h = H..1: regression targets r + V_{h+1}(s') from the
  /// freshly planned next step. Factors are reused; only targets and the
  /// new factor rows are recomputed.
  void plan();

  /// Q_h(s, a) for each action, through the step's probe cache.
  std::vector<double> q_values(int h, const Vector& s, std::span<const Vector> actions);
  /// Same values without touching the cache, O(t^2) each.
  std::vector<double> q_values_fresh(int h, const Vector& s, std::span<const Vector> actions) const;

  /// Greedy action index, lowest index on ties.
  std::size_t act(int h, const Vector& s, std::span<const Vector> actions);

  /// Stores one transition of the running episode.
  void record(int h, const Vector& s, const Vector& a, double reward, const Vector& next);

  /// Moves the running episode's transitions into the per-step datasets.
  void end_episode();

  QEstimator estimator(int h) const;
  std::size_t episodes() const noexcept { return episodes_; }
  std::size_t dataset_size(int h) const { return steps_.at(static_cast<std::size_t>(h - 1)).posterior.size(); }
  std::size_t fallbacks() const noexcept { return fallbacks_; }
  const KoviConfig& config() const noexcept { return config_; }

 private:
  struct Transition {
    Vector z;
    double reward;
    Vector next;
  };
  struct StepData {
    Posterior posterior;
    ProbeCache cache;
    std::unordered_map<std::string, std::vector<std::size_t>> state_probes;
    std::vector<double> rewards;
    // Probe indices (in the next step's cache) of each stored next state's
    // actions; empty for terminal next states and at h = H.
    std::vector<std::vector<std::size_t>> next_probes;
    std::vector<Transition> pending;
  };

  const std::vector<std::size_t>& probes_for(int h, const Vector& s);

  const EpisodicEnv* env_;
  KoviConfig config_;
  int horizon_;
  std::vector<StepData> steps_;
  std::size_t episodes_ = 0;
  std::size_t fallbacks_ = 0;
};

/// Called after plan() at the start of every episode.
using KoviHook = std::function<void(std::size_t episode, KoviAgent& agent)>;

/// T episodes of plan, greedy rollout, append. Regret is measured against
/// env.optimal_value; the return is the exact policy value when the
/// environment provides one, otherwise the realized return.
ExperimentRecord run_kovi(EpisodicEnv& env, const KoviConfig& config, std::uint64_t run_seed,
                          const KoviHook& hook = {});

/// Greedy rollout with a frozen agent (no data recorded).
double rollout_return(EpisodicEnv& env, const Vector& s1, const PolicyFn& policy);

}  // namespace symrl
