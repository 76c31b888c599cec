#pragma once

// Tabular Q-learning with Hoeffding bonuses, optionally replaying every
// observed transition across the orbit of the visited state-action pair.

#include "symrl/quotient.hpp"
#include "symrl/record.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace symrl {

/// An enumerable episodic task: model, embeddings, joint-space group and
/// initial-state distribution.
struct TabularTask {
  std::string name;
  EmbeddedModel model;
  std::vector<double> initial;
};

/// 4x4 gridworld with cells at {-1.5, -0.5, 0.5, 1.5}^2 and moves
/// (-1,0), (0,-1), (0,1), (1,0). A move succeeds with probability 0.8 and
/// slips to each perpendicular direction with 0.1; moves off the grid stay
/// put. Goals at (+-1.5, 1.5) pay 1 per step and traps at (+-0.5, 0.5) pay
/// 0, both absorbing. Starts are uniform over (+-0.5, -1.5); H = 8. The
/// group is the left-right mirror acting on (x, y, dx, dy).
TabularTask reflection_gridworld();

/// States -n..n on a line, moves -1 and +1 that succeed with probability
/// 0.9 and otherwise stay; both ends are absorbing and pay 1 per step.
/// Start at 0. Mirror symmetric under (s, a) -> (-s, -a).
TabularTask mirrored_chain(int n = 3, int horizon = 6);

/// Deterministic chain 0..n-1 with moves left/right; entering n-1 pays 1
/// and ends the episode. Trivial group.
TabularTask goal_chain(int n = 4, int horizon = 6);

/// Task by name: "reflection_grid", "mirrored_chain" or "goal_chain".
TabularTask make_tabular_task(const std::string& name);

/// For each pair index s * A + a, the sorted pair indices of its orbit under
/// the task group. Throws QuotientError when an image leaves S x A.
std::vector<std::vector<std::size_t>> pair_orbits(const EmbeddedModel& model);

/// c * sqrt(H^3 * iota / t); throws std::invalid_argument for t = 0.
double bonus(double c, int horizon, double iota, std::size_t t);

struct TabularConfig {
  std::size_t episodes = 1000;
  double c = 1.0;
  double p = 0.05;
  bool augment = false;
  bool timing = false;

  /// Throws std::invalid_argument for c < 0, p outside (0, 1) or no episodes.
  void validate() const;
};

class QLearner {
 public:
  QLearner(const TabularTask& task, const TabularConfig& config);

  /// Greedy action on Q_h(s, .), lowest index on ties. h is 0-based.
  std::size_t act(int h, std::size_t s) const;

  /// Update at 0-based step h from the observed (s, a, r, s'); replayed
  /// across the orbit of (s, a) in augmented mode.
  void update(int h, std::size_t s, std::size_t a, double reward, std::size_t next);

  double q(int h, std::size_t s, std::size_t a) const { return q_[index(h, s, a)]; }
  std::size_t visits(int h, std::size_t s, std::size_t a) const { return n_[index(h, s, a)]; }
  /// V_h(s); V_H is identically 0.
  double v(int h, std::size_t s) const { return v_[static_cast<std::size_t>(h) * states_ + s]; }

  TabularPolicy policy() const;
  double iota() const noexcept { return iota_; }
  const std::vector<std::size_t>& orbit(std::size_t s, std::size_t a) const {
    return orbits_[s * actions_ + a];
  }

 private:
  std::size_t index(int h, std::size_t s, std::size_t a) const {
    return (static_cast<std::size_t>(h) * states_ + s) * actions_ + a;
  }

  std::size_t states_;
  std::size_t actions_;
  int horizon_;
  double c_;
  double iota_;
  bool augment_;
  std::vector<std::vector<std::size_t>> orbits_;
  std::vector<double> q_;
  std::vector<std::size_t> n_;
  std::vector<double> v_;  // horizon + 1 rows
};

/// K episodes of greedy play with Q-learning updates. Each row's return is
/// the exact value of the episode's greedy policy from the sampled start.
ExperimentRecord run_tabular(const TabularTask& task, const TabularConfig& config,
                             std::uint64_t run_seed);

}  // namespace symrl
