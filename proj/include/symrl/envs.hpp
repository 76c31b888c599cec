#pragma once

// Episodic MDPs over embedded state-action vectors: the GP-sampled synthetic
// MDP, FrozenLake under D4, and the SynPl sequential placement task.

#include "symrl/group.hpp"
#include "symrl/quotient.hpp"
#include "symrl/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symrl {

struct StepResult {
  double reward = 0.0;
  Vector next;
  bool done = false;
};

/// Deterministic policy callback: (step h in [1, H], state, enumerated
/// actions) -> index into the actions.
using PolicyFn = std::function<std::size_t(int, const Vector&, std::span<const Vector>)>;

class EpisodicEnv {
 public:
  virtual ~EpisodicEnv() = default;

  virtual std::string_view name() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index action_dim() const = 0;
  Eigen::Index embed_dim() const { return state_dim() + action_dim(); }

  /// Symmetry acting on joint (state, action) embeddings.
  virtual const FiniteGroup& group() const = 0;

  /// Starts an episode. Deterministic in (episode_index, run_seed); also
  /// reseeds the stream that step() draws from.
  virtual Vector reset(std::uint64_t episode_index, std::uint64_t run_seed) = 0;

  /// One transition at step h in [1, H]. Throws std::invalid_argument for
  /// illegal actions.
  virtual StepResult step(int h, const Vector& s, const Vector& a) = 0;

  /// Legal actions in lexicographic order.
  virtual std::vector<Vector> actions(const Vector& s) const = 0;

  /// Absorbing states: no further reward, value zero.
  virtual bool is_terminal(const Vector& /*s*/) const { return false; }

  /// V_1^*(s1) used as the regret baseline.
  virtual double optimal_value(const Vector& s1) const = 0;

  /// Exact V_1^pi(s1) when the model is enumerable and stochastic.
  virtual std::optional<double> policy_value(const Vector& /*s1*/,
                                             const PolicyFn& /*policy*/) const {
    return std::nullopt;
  }

  /// Task objective of a finished episode's final state, when the
  /// environment has one (SynPl's placement score).
  virtual std::optional<double> final_objective(const Vector& /*s*/) const { return std::nullopt; }

  Vector joint(const Vector& s, const Vector& a) const;
};

struct EnvConfig {
  std::string name = "synthetic";  // synthetic | frozen_fixed | frozen_random | synpl
  std::uint64_t seed = 0;
  std::optional<int> horizon;      // environment default when unset
  int grid_points = 10;
  int rollouts = 8;
};

/// Throws std::invalid_argument for unknown names or out-of-range values.
std::unique_ptr<EpisodicEnv> make_env(const EnvConfig& config);

// ---------------------------------------------------------------------------

/// S = A = `grid_points` evenly spaced values in [-1, 1]. Reward and
/// transition tables come from GP samples under the sign-flip invariant RBF
/// kernel (lengthscale 0.1), smoothed by kernel ridge regression
/// (lambda 0.01). Rewards are rescaled to [0, 1]; each transition row is
/// shifted to a zero minimum, floored at 1e-6 and normalized.
class SyntheticEnv final : public EpisodicEnv {
 public:
  SyntheticEnv(std::uint64_t seed, int grid_points = 10, int horizon = 10);

  std::string_view name() const override { return "synthetic"; }
  int horizon() const override { return horizon_; }
  Eigen::Index state_dim() const override { return 1; }
  Eigen::Index action_dim() const override { return 1; }
  const FiniteGroup& group() const override { return group_; }

  Vector reset(std::uint64_t episode_index, std::uint64_t run_seed) override;
  StepResult step(int h, const Vector& s, const Vector& a) override;
  std::vector<Vector> actions(const Vector& s) const override;
  double optimal_value(const Vector& s1) const override;
  std::optional<double> policy_value(const Vector& s1, const PolicyFn& policy) const override;

  std::span<const double> grid() const noexcept { return grid_; }
  std::size_t index_of(double x) const;
  double reward(std::size_t s, std::size_t a) const { return model_.r(0, s, a); }
  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return model_.p(0, s, a, next);
  }
  const TabularMdp& model() const noexcept { return model_; }
  std::size_t initial_state() const noexcept { return initial_; }

 private:
  int horizon_;
  std::vector<double> grid_;
  std::size_t initial_;
  TabularMdp model_;
  FiniteGroup group_;
  ValueTables optimal_;
  Rng rng_;
};

/// Agent, goal and four holes on a 4x4 grid with cell centres at
/// {-1.5, -0.5, 0.5, 1.5}^2.
struct Layout {
  Eigen::Vector2d agent;
  Eigen::Vector2d goal;
  std::array<Eigen::Vector2d, 4> holes;

  Vector to_state() const;
  static Layout from_state(const Vector& s);
  /// Distinct cells, all on the grid, and a hole-free path start -> goal.
  bool valid() const;
};

/// Shortest hole-avoiding path length from agent to goal, or -1.
int shortest_path(const Layout& layout);

/// The 4x4 FrozenLake map SFFF/FHFH/FFFH/HFFG.
Layout default_layout();

/// Deterministic FrozenLake with D4 acting on all six positions and the
/// move direction. Moves off the grid leave the agent in place; entering a
/// hole ends the episode with reward 0, entering the goal with reward 1.
class FrozenLakeEnv final : public EpisodicEnv {
 public:
  enum class Mode { fixed, random };

  FrozenLakeEnv(Mode mode, std::uint64_t seed, int horizon = 10);

  std::string_view name() const override {
    return mode_ == Mode::fixed ? "frozen_fixed" : "frozen_random";
  }
  int horizon() const override { return horizon_; }
  Eigen::Index state_dim() const override { return 12; }
  Eigen::Index action_dim() const override { return 2; }
  const FiniteGroup& group() const override { return group_; }

  Vector reset(std::uint64_t episode_index, std::uint64_t run_seed) override;
  StepResult step(int h, const Vector& s, const Vector& a) override;
  std::vector<Vector> actions(const Vector& s) const override;
  bool is_terminal(const Vector& s) const override;
  double optimal_value(const Vector& s1) const override;

  Mode mode() const noexcept { return mode_; }
  const Layout& base_layout() const noexcept { return base_; }

  /// Uniform goal, start and holes, rejection-sampled until solvable.
  /// Throws std::runtime_error after 10,000 rejected draws.
  static Layout sample_layout(Rng& rng);

 private:
  Mode mode_;
  int horizon_;
  Layout base_;
  FiniteGroup group_;
  Rng rng_;
};

/// Sequential placement of 8 units on an 8x8 grid (centres at half-integers
/// in [-3.5, 3.5]^2), one unit per step, with the ring graph C8 over unit
/// indices. The state stacks 16 (x, y) slots: the 8 units in placement order
/// followed by 8 padding slots, with (0, 0) marking empty slots.
class SynPlEnv final : public EpisodicEnv {
 public:
  static constexpr int kUnits = 8;
  static constexpr int kSlots = 16;
  static constexpr int kSide = 8;

  SynPlEnv(std::uint64_t seed, int rollouts = 8, int calibration_episodes = 1000);

  std::string_view name() const override { return "synpl"; }
  int horizon() const override { return kUnits; }
  Eigen::Index state_dim() const override { return 2 * kSlots; }
  Eigen::Index action_dim() const override { return 2; }
  const FiniteGroup& group() const override { return group_; }

  Vector reset(std::uint64_t episode_index, std::uint64_t run_seed) override;
  StepResult step(int h, const Vector& s, const Vector& a) override;
  std::vector<Vector> actions(const Vector& s) const override;
  bool is_terminal(const Vector& s) const override;
  double optimal_value(const Vector& s1) const override;
  std::optional<double> final_objective(const Vector& s) const override { return objective(s); }

  static int placed_count(const Vector& s);
  /// -sum of Manhattan lengths of ring edges whose endpoints are both placed.
  static double objective(const Vector& s);
  /// Best objective over complete placements, by branch and bound.
  static double optimal_objective();

  /// Mean objective of `rollouts` uniform random completions of `s`; the
  /// exact objective when `s` is complete.
  double estimate_potential(const Vector& s, Rng& rng) const;

  /// Affine map of a potential difference onto [0, 1], clamped.
  double normalize(double difference) const noexcept;

  double difference_min() const noexcept { return dmin_; }
  double difference_max() const noexcept { return dmax_; }
  double random_mean_objective() const noexcept { return random_mean_; }

 private:
  int rollouts_;
  FiniteGroup group_;
  double dmin_ = 0.0;
  double dmax_ = 1.0;
  double random_mean_ = 0.0;
  Rng rng_;
};

}  // namespace symrl
