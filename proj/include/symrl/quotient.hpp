#pragma once

// Enumerable finite-horizon MDPs, exact dynamic programming, and reduction
// to the MDP over state orbits when the group fixes every action.

#include "symrl/group.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace symrl {

/// Finite-horizon MDP with per-step tables. Steps are 0-based here: h in
/// [0, horizon).
struct TabularMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  int horizon = 0;
  std::vector<double> transitions;  // [h][s][a][s']
  std::vector<double> rewards;      // [h][s][a]

  TabularMdp() = default;
  TabularMdp(std::size_t states, std::size_t actions, int horizon);

  double& p(int h, std::size_t s, std::size_t a, std::size_t next) {
    return transitions[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                           num_states + next];
  }
  double p(int h, std::size_t s, std::size_t a, std::size_t next) const {
    return transitions[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                           num_states + next];
  }
  double& r(int h, std::size_t s, std::size_t a) {
    return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double r(int h, std::size_t s, std::size_t a) const {
    return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }

  /// Throws std::invalid_argument unless every row is a distribution
  /// (within 1e-12) and every reward lies in [0, 1].
  void validate() const;
};

struct ValueTables {
  std::vector<std::vector<double>> v;  // horizon + 1 rows of num_states; last row zero
  std::vector<std::vector<double>> q;  // horizon rows of num_states * num_actions
  double q_at(int h, std::size_t s, std::size_t a, std::size_t num_actions) const {
    return q[static_cast<std::size_t>(h)][s * num_actions + a];
  }
};

/// Deterministic policy [h][s] -> action index.
using TabularPolicy = std::vector<std::vector<std::size_t>>;

/// Backward induction on the Bellman optimality equations.
ValueTables value_iteration(const TabularMdp& mdp);

/// V^pi for every (h, s), horizon + 1 rows.
std::vector<std::vector<double>> evaluate_policy(const TabularMdp& mdp, const TabularPolicy& policy);

/// Greedy policy of Q; ties go to the lowest action index.
TabularPolicy greedy_policy(const TabularMdp& mdp, const ValueTables& values);

class QuotientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State indices grouped into orbits. Orbits are ordered by their
/// representative, the member with the lexicographically smallest embedding.
struct OrbitPartition {
  std::vector<std::size_t> orbit_of;
  std::vector<std::vector<std::size_t>> orbits;  // representative first, then lex order

  std::size_t count() const noexcept { return orbits.size(); }
  std::size_t representative(std::size_t orbit) const { return orbits[orbit].front(); }
};

/// Index of the state matching `x` in max-norm within `tol`, or states.size().
std::size_t find_point(std::span<const Vector> points, const Vector& x, double tol = 1e-9);

/// Orbits of `group` (acting on the state embedding) on the enumerated
/// states. Throws QuotientError if some image is not an enumerated state.
OrbitPartition enumerate_orbits(std::span<const Vector> states, const FiniteGroup& group);

struct Quotient {
  TabularMdp mdp;
  OrbitPartition partition;
};

/// Builds M/G. `group` acts on joint embeddings (state, action); it must fix
/// every action embedding and leave r and P invariant. Throws QuotientError
/// otherwise, including when orbit-aggregated rows of orbit-mates disagree by
/// more than 1e-10.
Quotient build_quotient(const TabularMdp& mdp, const FiniteGroup& group,
                        std::span<const Vector> state_embed, std::span<const Vector> action_embed);

/// pi(s) = pi_quotient(Orb(s)).
TabularPolicy lift_policy(const TabularPolicy& quotient_policy, const OrbitPartition& partition);

/// A model together with the embeddings the group acts on.
struct EmbeddedModel {
  TabularMdp mdp;
  std::vector<Vector> state_embed;
  std::vector<Vector> action_embed;
  FiniteGroup group;  // acts on (state, action) embeddings
};

/// Three-state chain {-1, 0, 1} under state sign flip; actions stay,
/// move-inward and wander are fixed by the group.
EmbeddedModel sign_flip_chain_model();

/// 4x4 grid of half-integer cells under D4 acting on the cell only; actions
/// stay, move-inward and jump to a uniform random neighbour.
EmbeddedModel d4_grid_toy_model();

}  // namespace symrl
