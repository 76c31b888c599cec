#include "symrl/quotient.hpp"
#include "symrl/tabular.hpp"

#include <doctest.h>

#include <cmath>

using namespace symrl;

namespace {

double max_gap(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double gap = 0.0;
  for (std::size_t h = 0; h < a.size(); ++h) {
    for (std::size_t s = 0; s < a[h].size(); ++s) gap = std::max(gap, std::abs(a[h][s] - b[h][s]));
  }
  return gap;
}

void check_reduction(const EmbeddedModel& m, std::size_t expected_orbits) {
  const Quotient q = build_quotient(m.mdp, m.group, m.state_embed, m.action_embed);
  CHECK(q.partition.count() == expected_orbits);
  CHECK_NOTHROW(q.mdp.validate());
  const ValueTables full = value_iteration(m.mdp);
  const ValueTables reduced = value_iteration(q.mdp);
  for (int h = 0; h <= m.mdp.horizon; ++h) {
    for (std::size_t s = 0; s < m.mdp.num_states; ++s) {
      const auto hs = static_cast<std::size_t>(h);
      CHECK(std::abs(reduced.v[hs][q.partition.orbit_of[s]] - full.v[hs][s]) <= 1e-10);
    }
  }
  const auto lifted = lift_policy(greedy_policy(q.mdp, reduced), q.partition);
  CHECK(max_gap(evaluate_policy(m.mdp, lifted), full.v) <= 1e-10);
}

}  // namespace

TEST_CASE("value iteration and policy evaluation agree on the greedy policy") {
  const EmbeddedModel m = d4_grid_toy_model();
  const ValueTables opt = value_iteration(m.mdp);
  CHECK(max_gap(evaluate_policy(m.mdp, greedy_policy(m.mdp, opt)), opt.v) < 1e-12);
  for (double v : opt.v.back()) CHECK(v == 0.0);
}

TEST_CASE("sign-flip chain reduces to two orbits") {
  const EmbeddedModel m = sign_flip_chain_model();
  CHECK_NOTHROW(m.mdp.validate());
  check_reduction(m, 2);
  const OrbitPartition p = enumerate_orbits(m.state_embed, sign_flip_group(1));
  CHECK(p.orbits[0] == std::vector<std::size_t>{0, 2});
  CHECK(p.orbits[1] == std::vector<std::size_t>{1});
  CHECK(p.representative(0) == 0);
}

TEST_CASE("D4 toy grid reduces to corner, edge and interior orbits") {
  const EmbeddedModel m = d4_grid_toy_model();
  CHECK_NOTHROW(m.mdp.validate());
  check_reduction(m, 3);
  const OrbitPartition p = enumerate_orbits(m.state_embed, d4_block_group(1));
  std::vector<std::size_t> sizes;
  for (const auto& o : p.orbits) sizes.push_back(o.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{4, 4, 8});
}

TEST_CASE("quotient construction rejects broken symmetry") {
  SUBCASE("group moves actions") {
    const TabularTask grid = reflection_gridworld();
    CHECK_THROWS_AS(build_quotient(grid.model.mdp, grid.model.group, grid.model.state_embed,
                                   grid.model.action_embed),
                    QuotientError);
  }
  SUBCASE("reward not invariant") {
    EmbeddedModel m = sign_flip_chain_model();
    m.mdp.r(0, 0, 0) = 0.9;
    CHECK_THROWS_AS(build_quotient(m.mdp, m.group, m.state_embed, m.action_embed), QuotientError);
  }
  SUBCASE("transition not invariant") {
    EmbeddedModel m = sign_flip_chain_model();
    m.mdp.p(1, 0, 2, 0) = 0.7;
    m.mdp.p(1, 0, 2, 1) = 0.3;
    CHECK_THROWS_AS(build_quotient(m.mdp, m.group, m.state_embed, m.action_embed), QuotientError);
  }
  SUBCASE("image outside the state set") {
    std::vector<Vector> states = {Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
    CHECK_THROWS_AS(enumerate_orbits(states, sign_flip_group(1)), QuotientError);
  }
}

TEST_CASE("model validation") {
  TabularMdp m(2, 1, 1);
  m.p(0, 0, 0, 0) = 1.0;
  m.p(0, 1, 0, 1) = 0.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.p(0, 1, 0, 0) = 0.5;
  CHECK_NOTHROW(m.validate());
  m.r(0, 0, 0) = 1.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
