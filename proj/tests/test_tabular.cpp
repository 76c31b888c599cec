#include "symrl/rng.hpp"
#include "symrl/tabular.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace symrl;

namespace {

TabularConfig make_config(double c, std::size_t episodes, bool augment) {
  TabularConfig cfg;
  cfg.c = c;
  cfg.episodes = episodes;
  cfg.augment = augment;
  return cfg;
}

std::size_t total_visits(const QLearner& q, const TabularTask& task, int h) {
  std::size_t n = 0;
  for (std::size_t s = 0; s < task.model.mdp.num_states; ++s) {
    for (std::size_t a = 0; a < task.model.mdp.num_actions; ++a) n += q.visits(h, s, a);
  }
  return n;
}

}  // namespace

TEST_CASE("Hoeffding bonus") {
  CHECK(bonus(1.0, 2, 1.0, 1) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
  CHECK(bonus(0.0, 5, 3.0, 1) == 0.0);
  CHECK(bonus(0.0, 5, 3.0, 100) == 0.0);
  double prev = bonus(0.5, 4, 2.0, 1);
  for (std::size_t t = 2; t < 50; ++t) {
    const double b = bonus(0.5, 4, 2.0, t);
    CHECK(b < prev);
    prev = b;
  }
  CHECK_THROWS_AS(bonus(1.0, 2, 1.0, 0), std::invalid_argument);
}

TEST_CASE("first visit overwrites Q with r + V + b_1") {
  const TabularTask task = goal_chain(4, 6);
  QLearner q(task, make_config(0.3, 10, false));
  const double v_next = q.v(1, 1);
  CHECK(v_next == 6.0);
  q.update(0, 0, 1, 0.0, 1);
  CHECK(q.q(0, 0, 1) == doctest::Approx(0.0 + v_next + bonus(0.3, 6, q.iota(), 1)).epsilon(1e-15));
  CHECK(q.visits(0, 0, 1) == 1);
  CHECK(q.v(0, 0) == 6.0);  // clamped at H
  // iota = log(S A T / p) with T = K H.
  CHECK(q.iota() == doctest::Approx(std::log(4.0 * 2.0 * 60.0 / 0.05)));
}

TEST_CASE("task models are valid") {
  for (const auto& name : {"reflection_grid", "mirrored_chain", "goal_chain"}) {
    const TabularTask task = make_tabular_task(name);
    CAPTURE(name);
    CHECK_NOTHROW(task.model.mdp.validate());
    CHECK(std::accumulate(task.initial.begin(), task.initial.end(), 0.0) == doctest::Approx(1.0));
    CHECK(verify_group(task.model.group).ok());
  }
  CHECK_THROWS_AS(make_tabular_task("cliff"), std::invalid_argument);
}

TEST_CASE("reflection gridworld orbits and symmetric optimum") {
  const TabularTask task = reflection_gridworld();
  const auto& m = task.model;
  CHECK(m.mdp.num_states == 16);
  CHECK(m.mdp.num_actions == 4);
  CHECK(m.mdp.horizon == 8);
  const auto orbits = pair_orbits(m);
  std::size_t singletons = 0;
  std::size_t pairs = 0;
  for (const auto& o : orbits) (o.size() == 1 ? singletons : pairs) += 1;
  // Every cell has x != 0, so no pair is fixed by the mirror.
  CHECK(singletons == 0);
  CHECK(pairs == 64);
  // (x, y, dx, dy) -> (-x, y, -dx, dy).
  const std::size_t s = find_point(m.state_embed, (Vector(2) << -1.5, -0.5).finished());
  const std::size_t t = find_point(m.state_embed, (Vector(2) << 1.5, -0.5).finished());
  const auto& o = orbits[s * 4 + 0];
  REQUIRE(o.size() == 2);
  CHECK(std::find(o.begin(), o.end(), t * 4 + 3) != o.end());

  const ValueTables opt = value_iteration(m.mdp);
  for (std::size_t i = 0; i < 16; ++i) {
    const Vector mirrored = (Vector(2) << -m.state_embed[i][0], m.state_embed[i][1]).finished();
    CHECK(opt.v[0][i] == doctest::Approx(opt.v[0][find_point(m.state_embed, mirrored)]).epsilon(1e-14));
  }
  const std::size_t start = find_point(m.state_embed, (Vector(2) << -0.5, -1.5).finished());
  CHECK(opt.v[0][start] > 0.0);
  CHECK(opt.v[0][start] < 8.0);
}

TEST_CASE("augmented updates keep Q and N constant on orbits") {
  const TabularTask task = mirrored_chain(3, 6);
  const auto& mdp = task.model.mdp;
  QLearner q(task, make_config(0.2, 200, true));
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t ns = mdp.num_states;
  for (int episode = 0; episode < 200; ++episode) {
    std::size_t s = 3;
    for (int h = 0; h < mdp.horizon; ++h) {
      const std::size_t a = u(rng) < 0.3 ? static_cast<std::size_t>(u(rng) < 0.5) : q.act(h, s);
      double acc = 0.0;
      std::size_t next = ns - 1;
      const double draw = u(rng);
      for (std::size_t k = 0; k < ns; ++k) {
        acc += mdp.p(h, s, a, k);
        if (draw < acc) {
          next = k;
          break;
        }
      }
      const std::size_t before = total_visits(q, task, h);
      q.update(h, s, a, mdp.r(h, s, a), next);
      CHECK(total_visits(q, task, h) == before + q.orbit(s, a).size());
      s = next;
    }
  }
  for (int h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        CHECK(q.q(h, s, a) == q.q(h, ns - 1 - s, 1 - a));
        CHECK(q.visits(h, s, a) == q.visits(h, ns - 1 - s, 1 - a));
      }
      CHECK(q.v(h, s) >= 0.0);
      CHECK(q.v(h, s) <= mdp.horizon);
    }
  }
  CHECK(q.orbit(3, 0).size() == 2);  // (0, -1) <-> (0, +1)
}

TEST_CASE("plain updates touch one pair per step") {
  const TabularTask task = mirrored_chain(2, 4);
  QLearner q(task, make_config(0.2, 10, false));
  q.update(0, 2, 0, 0.0, 1);
  CHECK(total_visits(q, task, 0) == 1);
  CHECK(q.q(0, 2, 0) != q.q(0, 2, 1));
}

TEST_CASE("augmentation under the trivial group equals plain learning") {
  const TabularTask task = goal_chain(5, 8);
  const auto plain = run_tabular(task, make_config(0.1, 300, false), 4);
  const auto aug = run_tabular(task, make_config(0.1, 300, true), 4);
  REQUIRE(plain.rows.size() == aug.rows.size());
  for (std::size_t i = 0; i < plain.rows.size(); ++i) {
    CHECK(plain.rows[i].ret == aug.rows[i].ret);
    CHECK(plain.rows[i].cum_regret == aug.rows[i].cum_regret);
  }
}

TEST_CASE("deterministic goal chain: regret vanishes") {
  const TabularTask task = goal_chain(4, 6);
  const auto rec = run_tabular(task, make_config(0.01, 3000, false), 1);
  CHECK(rec.rows.front().v_star == 1.0);
  for (std::size_t i = rec.rows.size() - 100; i < rec.rows.size(); ++i) CHECK(rec.rows[i].regret == 0.0);
  for (const auto& r : rec.rows) CHECK(r.regret >= -1e-9);
}

TEST_CASE("tabular runs are reproducible") {
  const TabularTask task = reflection_gridworld();
  const auto a = run_tabular(task, make_config(0.02, 200, true), 9);
  const auto b = run_tabular(task, make_config(0.02, 200, true), 9);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].cum_regret == b.rows[i].cum_regret);
  CHECK(a.meta.algorithm == "qlearning_augmented");
}

TEST_CASE("tabular config validation") {
  TabularConfig c;
  CHECK(c.c == 1.0);
  c.p = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.p = 0.1;
  c.c = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.c = 1.0;
  c.episodes = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
