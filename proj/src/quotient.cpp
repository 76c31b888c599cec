#include "symrl/quotient.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace symrl {

TabularMdp::TabularMdp(std::size_t states, std::size_t actions, int horizon_)
    : num_states(states),
      num_actions(actions),
      horizon(horizon_),
      transitions(static_cast<std::size_t>(horizon_) * states * actions * states, 0.0),
      rewards(static_cast<std::size_t>(horizon_) * states * actions, 0.0) {}

void TabularMdp::validate() const {
  for (int h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < num_states; ++s) {
      for (std::size_t a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (std::size_t n = 0; n < num_states; ++n) {
          const double q = p(h, s, a, n);
          if (q < 0.0) {
            throw std::invalid_argument(fmt::format("negative probability at ({},{},{})", h, s, a));
          }
          sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          throw std::invalid_argument(
              fmt::format("row ({},{},{}) sums to {:.17g}", h, s, a, sum));
        }
        if (r(h, s, a) < 0.0 || r(h, s, a) > 1.0) {
          throw std::invalid_argument(fmt::format("reward at ({},{},{}) outside [0,1]", h, s, a));
        }
      }
    }
  }
}

ValueTables value_iteration(const TabularMdp& mdp) {
  const std::size_t ns = mdp.num_states;
  const std::size_t na = mdp.num_actions;
  ValueTables out;
  out.v.assign(static_cast<std::size_t>(mdp.horizon) + 1, std::vector<double>(ns, 0.0));
  out.q.assign(static_cast<std::size_t>(mdp.horizon), std::vector<double>(ns * na, 0.0));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next = out.v[static_cast<std::size_t>(h) + 1];
    for (std::size_t s = 0; s < ns; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double q = mdp.r(h, s, a);
        for (std::size_t n = 0; n < ns; ++n) q += mdp.p(h, s, a, n) * next[n];
        out.q[static_cast<std::size_t>(h)][s * na + a] = q;
        best = std::max(best, q);
      }
      out.v[static_cast<std::size_t>(h)][s] = best;
    }
  }
  return out;
}

std::vector<std::vector<double>> evaluate_policy(const TabularMdp& mdp,
                                                 const TabularPolicy& policy) {
  const std::size_t ns = mdp.num_states;
  std::vector<std::vector<double>> v(static_cast<std::size_t>(mdp.horizon) + 1,
                                     std::vector<double>(ns, 0.0));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next = v[static_cast<std::size_t>(h) + 1];
    for (std::size_t s = 0; s < ns; ++s) {
      const std::size_t a = policy[static_cast<std::size_t>(h)][s];
      double q = mdp.r(h, s, a);
      for (std::size_t n = 0; n < ns; ++n) q += mdp.p(h, s, a, n) * next[n];
      v[static_cast<std::size_t>(h)][s] = q;
    }
  }
  return v;
}

TabularPolicy greedy_policy(const TabularMdp& mdp, const ValueTables& values) {
  TabularPolicy policy(static_cast<std::size_t>(mdp.horizon),
                       std::vector<std::size_t>(mdp.num_states, 0));
  for (int h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < mdp.num_actions; ++a) {
        if (values.q_at(h, s, a, mdp.num_actions) > values.q_at(h, s, best, mdp.num_actions)) {
          best = a;
        }
      }
      policy[static_cast<std::size_t>(h)][s] = best;
    }
  }
  return policy;
}

std::size_t find_point(std::span<const Vector> points, const Vector& x, double tol) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() == x.size() && (points[i] - x).cwiseAbs().maxCoeff() < tol) return i;
  }
  return points.size();
}

namespace {

// perms[g][s] = index of g . s.
OrbitPartition partition_from_permutations(const std::vector<std::vector<std::size_t>>& perms,
                                           std::span<const Vector> embed) {
  const std::size_t n = embed.size();
  OrbitPartition part;
  part.orbit_of.assign(n, n);
  std::vector<std::vector<std::size_t>> orbits;
  for (std::size_t s = 0; s < n; ++s) {
    if (part.orbit_of[s] != n) continue;
    std::vector<std::size_t> members;
    for (const auto& perm : perms) {
      if (std::find(members.begin(), members.end(), perm[s]) == members.end()) {
        members.push_back(perm[s]);
      }
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return lex_less(embed[a], embed[b]); });
    for (auto m : members) part.orbit_of[m] = orbits.size();
    orbits.push_back(std::move(members));
  }
  std::vector<std::size_t> order(orbits.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(embed[orbits[a].front()], embed[orbits[b].front()]);
  });
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (auto m : orbits[order[k]]) part.orbit_of[m] = k;
    part.orbits.push_back(std::move(orbits[order[k]]));
  }
  return part;
}

}  // namespace

OrbitPartition enumerate_orbits(std::span<const Vector> states, const FiniteGroup& group) {
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < group.size(); ++g) {
    std::vector<std::size_t> perm(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      perm[s] = find_point(states, apply(group[g], states[s]));
      if (perm[s] == states.size()) {
        throw QuotientError(fmt::format(
            "group element {} maps state {} outside the enumerated state set", g, s));
      }
    }
    perms.push_back(std::move(perm));
  }
  return partition_from_permutations(perms, states);
}

Quotient build_quotient(const TabularMdp& mdp, const FiniteGroup& group,
                        std::span<const Vector> state_embed, std::span<const Vector> action_embed) {
  constexpr double tol = 1e-10;
  if (state_embed.size() != mdp.num_states || action_embed.size() != mdp.num_actions) {
    throw std::invalid_argument("embedding counts do not match the model");
  }
  const Eigen::Index ds = state_embed.front().size();
  const Eigen::Index da = action_embed.front().size();
  if (group.dim() != ds + da) {
    throw std::invalid_argument("group must act on the joint (state, action) embedding");
  }

  // State permutation of every element, checking that actions are fixed.
  std::vector<std::vector<std::size_t>> perms;
  for (std::size_t g = 0; g < group.size(); ++g) {
    std::vector<std::size_t> perm(mdp.num_states);
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        Vector z(ds + da);
        z << state_embed[s], action_embed[a];
        const Vector img = apply(group[g], z);
        if ((img.tail(da) - action_embed[a]).cwiseAbs().maxCoeff() > tol) {
          throw QuotientError(fmt::format(
              "group element {} moves action {}; the quotient needs a trivial action on A", g, a));
        }
        const std::size_t target = find_point(state_embed, img.head(ds));
        if (target == mdp.num_states) {
          throw QuotientError(fmt::format("group element {} maps state {} outside S", g, s));
        }
        if (a == 0) {
          perm[s] = target;
        } else if (perm[s] != target) {
          throw QuotientError("state image depends on the action");
        }
      }
    }
    perms.push_back(std::move(perm));
  }

  for (std::size_t g = 0; g < perms.size(); ++g) {
    const auto& perm = perms[g];
    for (int h = 0; h < mdp.horizon; ++h) {
      for (std::size_t s = 0; s < mdp.num_states; ++s) {
        for (std::size_t a = 0; a < mdp.num_actions; ++a) {
          if (std::abs(mdp.r(h, perm[s], a) - mdp.r(h, s, a)) > tol) {
            throw QuotientError(fmt::format(
                "reward not invariant: r({},{},{}) differs under element {}", h, s, a, g));
          }
          for (std::size_t n = 0; n < mdp.num_states; ++n) {
            if (std::abs(mdp.p(h, perm[s], a, perm[n]) - mdp.p(h, s, a, n)) > tol) {
              throw QuotientError(fmt::format(
                  "transition not invariant: P({}|{},{}) at step {} under element {}", n, s, a, h, g));
            }
          }
        }
      }
    }
  }

  Quotient out;
  out.partition = partition_from_permutations(perms, state_embed);
  const auto& part = out.partition;
  const std::size_t no = part.count();
  out.mdp = TabularMdp(no, mdp.num_actions, mdp.horizon);

  for (int h = 0; h < mdp.horizon; ++h) {
    for (std::size_t o = 0; o < no; ++o) {
      for (std::size_t a = 0; a < mdp.num_actions; ++a) {
        std::vector<double> reference;
        for (std::size_t member : part.orbits[o]) {
          std::vector<double> row(no, 0.0);
          for (std::size_t n = 0; n < mdp.num_states; ++n) {
            row[part.orbit_of[n]] += mdp.p(h, member, a, n);
          }
          if (reference.empty()) {
            reference = std::move(row);
            continue;
          }
          for (std::size_t k = 0; k < no; ++k) {
            if (std::abs(row[k] - reference[k]) > tol) {
              throw QuotientError(fmt::format(
                  "orbit dynamics ill-defined: states {} and {} disagree on P(orbit {}|., {})",
                  part.orbits[o].front(), member, k, a));
            }
          }
        }
        for (std::size_t k = 0; k < no; ++k) out.mdp.p(h, o, a, k) = reference[k];
        out.mdp.r(h, o, a) = mdp.r(h, part.representative(o), a);
      }
    }
  }
  return out;
}

TabularPolicy lift_policy(const TabularPolicy& quotient_policy, const OrbitPartition& partition) {
  TabularPolicy out;
  out.reserve(quotient_policy.size());
  for (const auto& step : quotient_policy) {
    std::vector<std::size_t> row(partition.orbit_of.size());
    for (std::size_t s = 0; s < row.size(); ++s) row[s] = step[partition.orbit_of[s]];
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

std::vector<Vector> action_ids(std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back(Vector::Constant(1, static_cast<double>(a)));
  return out;
}

}  // namespace

EmbeddedModel sign_flip_chain_model() {
  enum Action : std::size_t { kStay, kInward, kWander };
  const std::vector<double> xs = {-1.0, 0.0, 1.0};
  TabularMdp mdp(3, 3, 4);
  for (int h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < 3; ++s) {
      const bool centre = s == 1;
      mdp.p(h, s, kStay, s) = 1.0;
      mdp.p(h, s, kInward, 1) = 1.0;
      if (centre) {
        mdp.p(h, s, kWander, 0) = 0.5;
        mdp.p(h, s, kWander, 2) = 0.5;
      } else {
        mdp.p(h, s, kWander, s) = 0.5;
        mdp.p(h, s, kWander, 1) = 0.5;
      }
      mdp.r(h, s, kStay) = centre ? 0.2 : 0.6;
      mdp.r(h, s, kInward) = 0.1;
      mdp.r(h, s, kWander) = centre ? 0.4 : 0.0;
    }
  }
  std::vector<Vector> states;
  for (double x : xs) states.push_back(Vector::Constant(1, x));
  return {std::move(mdp), std::move(states), action_ids(3),
          extend_with_identity(sign_flip_group(1), 1)};
}

EmbeddedModel d4_grid_toy_model() {
  enum Action : std::size_t { kStay, kInward, kJump };
  const double coords[] = {-1.5, -0.5, 0.5, 1.5};
  std::vector<Vector> states;
  for (double x : coords) {
    for (double y : coords) states.push_back((Vector(2) << x, y).finished());
  }
  auto inward = [](double c) { return std::abs(c) > 1.0 ? c - std::copysign(1.0, c) : c; };

  TabularMdp mdp(16, 3, 5);
  for (int h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < 16; ++s) {
      const Vector& c = states[s];
      const int far = (std::abs(c[0]) > 1.0) + (std::abs(c[1]) > 1.0);
      mdp.p(h, s, kStay, s) = 1.0;
      mdp.p(h, s, kInward, find_point(states, (Vector(2) << inward(c[0]), inward(c[1])).finished())) = 1.0;
      const double moves[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (const auto& m : moves) {
        Vector next = c + (Vector(2) << m[0], m[1]).finished();
        std::size_t n = find_point(states, next);
        if (n == states.size()) n = s;
        mdp.p(h, s, kJump, n) += 0.25;
      }
      mdp.r(h, s, kStay) = far == 2 ? 0.1 : (far == 1 ? 0.3 : 0.8);
      mdp.r(h, s, kInward) = 0.05;
      mdp.r(h, s, kJump) = 0.2;
    }
  }
  return {std::move(mdp), std::move(states), action_ids(3),
          extend_with_identity(d4_block_group(1), 1)};
}

}  // namespace symrl
