#include "symrl/tabular.hpp"

#include "symrl/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace symrl {

namespace {

Vector vec2(double x, double y) { return (Vector(2) << x, y).finished(); }

FiniteGroup mirror_group(Eigen::Index state_dim) {
  // Negates the first state coordinate and the first action coordinate.
  const Eigen::Index d = state_dim + (state_dim == 1 ? 1 : 2);
  Matrix m = Matrix::Identity(d, d);
  m(0, 0) = -1.0;
  m(state_dim, state_dim) = -1.0;
  return FiniteGroup("mirror", {GroupElement(Matrix::Identity(d, d)), GroupElement(m)});
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u beyond the accumulated mass: take the last supported index.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  throw std::invalid_argument("sample_index: empty distribution");
}

}  // namespace

TabularTask reflection_gridworld() {
  const double coords[] = {-1.5, -0.5, 0.5, 1.5};
  std::vector<Vector> states;
  for (double x : coords) {
    for (double y : coords) states.push_back(vec2(x, y));
  }
  const std::vector<Vector> moves = {vec2(-1, 0), vec2(0, -1), vec2(0, 1), vec2(1, 0)};
  auto is_goal = [](const Vector& c) { return c[1] == 1.5 && std::abs(c[0]) == 1.5; };
  auto is_trap = [](const Vector& c) { return c[1] == 0.5 && std::abs(c[0]) == 0.5; };

  constexpr int kHorizon = 8;
  TabularMdp mdp(states.size(), moves.size(), kHorizon);
  for (int h = 0; h < kHorizon; ++h) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      const Vector& c = states[s];
      for (std::size_t a = 0; a < moves.size(); ++a) {
        if (is_goal(c) || is_trap(c)) {
          mdp.p(h, s, a, s) = 1.0;
          mdp.r(h, s, a) = is_goal(c) ? 1.0 : 0.0;
          continue;
        }
        const Vector& m = moves[a];
        const Vector perp = vec2(m[1], m[0]);
        const std::pair<Vector, double> outcomes[] = {{m, 0.8}, {perp, 0.1}, {-perp, 0.1}};
        for (const auto& [dir, prob] : outcomes) {
          std::size_t n = find_point(states, c + dir);
          if (n == states.size()) n = s;
          mdp.p(h, s, a, n) += prob;
        }
      }
    }
  }
  std::vector<double> initial(states.size(), 0.0);
  initial[find_point(states, vec2(-0.5, -1.5))] = 0.5;
  initial[find_point(states, vec2(0.5, -1.5))] = 0.5;
  return {"reflection_grid", {std::move(mdp), std::move(states), moves, mirror_group(2)},
          std::move(initial)};
}

TabularTask mirrored_chain(int n, int horizon) {
  if (n < 1 || horizon < 1) throw std::invalid_argument("mirrored_chain: n and horizon must be >= 1");
  const auto count = static_cast<std::size_t>(2 * n + 1);
  std::vector<Vector> states;
  for (int i = -n; i <= n; ++i) states.push_back(Vector::Constant(1, i));
  const std::vector<Vector> moves = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  TabularMdp mdp(count, 2, horizon);
  for (int h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < count; ++s) {
      const bool end = s == 0 || s + 1 == count;
      for (std::size_t a = 0; a < 2; ++a) {
        if (end) {
          mdp.p(h, s, a, s) = 1.0;
          mdp.r(h, s, a) = 1.0;
          continue;
        }
        const std::size_t target = a == 0 ? s - 1 : s + 1;
        mdp.p(h, s, a, target) = 0.9;
        mdp.p(h, s, a, s) = 0.1;
      }
    }
  }
  std::vector<double> initial(count, 0.0);
  initial[static_cast<std::size_t>(n)] = 1.0;
  return {"mirrored_chain", {std::move(mdp), std::move(states), moves, mirror_group(1)},
          std::move(initial)};
}

TabularTask goal_chain(int n, int horizon) {
  if (n < 2 || horizon < 1) throw std::invalid_argument("goal_chain: need n >= 2 and horizon >= 1");
  const auto count = static_cast<std::size_t>(n);
  std::vector<Vector> states;
  for (int i = 0; i < n; ++i) states.push_back(Vector::Constant(1, i));
  const std::vector<Vector> moves = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  TabularMdp mdp(count, 2, horizon);
  for (int h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        if (s + 1 == count) {
          mdp.p(h, s, a, s) = 1.0;
          continue;
        }
        const std::size_t target = a == 0 ? (s == 0 ? 0 : s - 1) : s + 1;
        mdp.p(h, s, a, target) = 1.0;
        mdp.r(h, s, a) = target + 1 == count ? 1.0 : 0.0;
      }
    }
  }
  std::vector<double> initial(count, 0.0);
  initial[0] = 1.0;
  return {"goal_chain", {std::move(mdp), std::move(states), moves, trivial_group(2)},
          std::move(initial)};
}

TabularTask make_tabular_task(const std::string& name) {
  if (name == "reflection_grid") return reflection_gridworld();
  if (name == "mirrored_chain") return mirrored_chain();
  if (name == "goal_chain") return goal_chain();
  throw std::invalid_argument(fmt::format(
      "unknown tabular task '{}' (expected reflection_grid, mirrored_chain or goal_chain)", name));
}

std::vector<std::vector<std::size_t>> pair_orbits(const EmbeddedModel& model) {
  const std::size_t ns = model.state_embed.size();
  const std::size_t na = model.action_embed.size();
  const Eigen::Index ds = model.state_embed.front().size();
  const Eigen::Index da = model.action_embed.front().size();
  if (model.group.dim() != ds + da) {
    throw std::invalid_argument("group must act on the joint (state, action) embedding");
  }
  std::vector<std::vector<std::size_t>> orbits(ns * na);
  Vector z(ds + da);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      z << model.state_embed[s], model.action_embed[a];
      auto& members = orbits[s * na + a];
      for (const auto& g : model.group) {
        const Vector img = apply(g, z);
        const std::size_t gs = find_point(model.state_embed, img.head(ds));
        const std::size_t ga = find_point(model.action_embed, img.tail(da));
        if (gs == ns || ga == na) {
          throw QuotientError(fmt::format("orbit of pair ({}, {}) leaves S x A", s, a));
        }
        members.push_back(gs * na + ga);
      }
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
    }
  }
  return orbits;
}

double bonus(double c, int horizon, double iota, std::size_t t) {
  if (t == 0) throw std::invalid_argument("bonus: visit count must be >= 1");
  const double h = horizon;
  return c * std::sqrt(h * h * h * iota / static_cast<double>(t));
}

void TabularConfig::validate() const {
  if (!(c >= 0.0)) throw std::invalid_argument(fmt::format("tabular.c must be >= 0, got {}", c));
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument(fmt::format("tabular.p must lie in (0, 1), got {}", p));
  }
  if (episodes == 0) throw std::invalid_argument("tabular.K must be positive");
}

QLearner::QLearner(const TabularTask& task, const TabularConfig& config)
    : states_(task.model.mdp.num_states),
      actions_(task.model.mdp.num_actions),
      horizon_(task.model.mdp.horizon),
      c_(config.c),
      augment_(config.augment) {
  config.validate();
  const double total_steps = static_cast<double>(config.episodes) * horizon_;
  iota_ = std::log(static_cast<double>(states_ * actions_) * total_steps / config.p);
  if (augment_) {
    orbits_ = pair_orbits(task.model);
  } else {
    orbits_.resize(states_ * actions_);
    for (std::size_t i = 0; i < orbits_.size(); ++i) orbits_[i] = {i};
  }
  const auto hs = static_cast<std::size_t>(horizon_);
  q_.assign(hs * states_ * actions_, static_cast<double>(horizon_));
  n_.assign(q_.size(), 0);
  v_.assign((hs + 1) * states_, 0.0);
  std::fill(v_.begin(), v_.begin() + static_cast<std::ptrdiff_t>(hs * states_),
            static_cast<double>(horizon_));
}

std::size_t QLearner::act(int h, std::size_t s) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < actions_; ++a) {
    if (q(h, s, a) > q(h, s, best)) best = a;
  }
  return best;
}

void QLearner::update(int h, std::size_t s, std::size_t a, double reward, std::size_t next) {
  const double target_base = reward + v(h + 1, next);
  const double H = horizon_;
  for (std::size_t pair : orbit(s, a)) {
    const std::size_t ps = pair / actions_;
    const std::size_t pa = pair % actions_;
    const std::size_t i = index(h, ps, pa);
    const std::size_t t = ++n_[i];
    const double alpha = (H + 1.0) / (H + static_cast<double>(t));
    q_[i] = (1.0 - alpha) * q_[i] + alpha * (target_base + bonus(c_, horizon_, iota_, t));
  }
  for (std::size_t pair : orbit(s, a)) {
    const std::size_t ps = pair / actions_;
    double best = q(h, ps, 0);
    for (std::size_t b = 1; b < actions_; ++b) best = std::max(best, q(h, ps, b));
    v_[static_cast<std::size_t>(h) * states_ + ps] = std::min(H, best);
  }
}

TabularPolicy QLearner::policy() const {
  TabularPolicy pi(static_cast<std::size_t>(horizon_), std::vector<std::size_t>(states_));
  for (int h = 0; h < horizon_; ++h) {
    for (std::size_t s = 0; s < states_; ++s) pi[static_cast<std::size_t>(h)][s] = act(h, s);
  }
  return pi;
}

ExperimentRecord run_tabular(const TabularTask& task, const TabularConfig& config,
                             std::uint64_t run_seed) {
  using Clock = std::chrono::steady_clock;
  const TabularMdp& mdp = task.model.mdp;
  QLearner learner(task, config);
  const ValueTables optimal = value_iteration(mdp);
  Rng rng = make_rng(run_seed, "env");

  ExperimentRecord record;
  record.meta = {task.name, config.augment ? "qlearning_augmented" : "qlearning", "tabular", 0.0,
                 0.0, run_seed};

  std::vector<double> row(mdp.num_states);
  for (std::size_t k = 0; k < config.episodes; ++k) {
    const auto start = Clock::now();
    const std::size_t s1 = sample_index(task.initial, rng);
    const double value = evaluate_policy(mdp, learner.policy())[0][s1];
    std::size_t s = s1;
    for (int h = 0; h < mdp.horizon; ++h) {
      const std::size_t a = learner.act(h, s);
      for (std::size_t n = 0; n < mdp.num_states; ++n) row[n] = mdp.p(h, s, a, n);
      const std::size_t next = sample_index(row, rng);
      learner.update(h, s, a, mdp.r(h, s, a), next);
      s = next;
    }
    const double ms = config.timing
        ? std::chrono::duration<double, std::milli>(Clock::now() - start).count()
        : 0.0;
    record.add(value, optimal.v[0][s1], ms);
  }
  return record;
}

}  // namespace symrl
