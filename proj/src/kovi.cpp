#include "symrl/kovi.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace symrl {

void ExperimentRecord::add(double ret, double v_star, double ms) {
  EpisodeRow row;
  row.episode = rows.size();
  row.ret = ret;
  row.v_star = v_star;
  row.regret = v_star - ret;
  row.cum_regret = cumulative_regret() + row.regret;
  row.ms = ms;
  rows.push_back(row);
}

void KoviConfig::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument(fmt::format("beta must be >= 0, got {}", beta));
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("lambda must be > 0, got {}", lambda));
  if (episodes == 0) throw std::invalid_argument("episode budget must be positive");
}

double optimistic_q(double mean, double std, double beta, double cap) noexcept {
  return std::min(std::max(mean + beta * std, 0.0), cap);
}

std::size_t greedy_index(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("greedy_index: no actions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double QEstimator::q_value(const Vector& z) const {
  return optimistic_q(posterior_->mean(z), posterior_->stddev(z), beta_, cap_);
}

double QEstimator::q_probe(std::size_t probe) const {
  return optimistic_q(cache_->mean(probe, *posterior_), cache_->stddev(probe, *posterior_), beta_,
                      cap_);
}

KoviAgent::KoviAgent(const EpisodicEnv& env, KoviConfig config)
    : env_(&env), config_(std::move(config)), horizon_(env.horizon()) {
  config_.validate();
  if (const auto& g = config_.kernel.symmetrization(); g && g->dim() != env.embed_dim()) {
    throw std::invalid_argument(fmt::format("kernel group '{}' acts on R^{}, the {} embedding is R^{}",
                                            g->name(), g->dim(), env.name(), env.embed_dim()));
  }
  steps_.reserve(static_cast<std::size_t>(horizon_));
  for (int h = 0; h < horizon_; ++h) {
    steps_.push_back(StepData{Posterior(config_.kernel, config_.lambda), {}, {}, {}, {}, {}});
  }
}

QEstimator KoviAgent::estimator(int h) const {
  const StepData& step = steps_.at(static_cast<std::size_t>(h - 1));
  return QEstimator(step.posterior, step.cache, config_.beta, static_cast<double>(horizon_ - h + 1));
}

const std::vector<std::size_t>& KoviAgent::probes_for(int h, const Vector& s) {
  StepData& step = steps_[static_cast<std::size_t>(h - 1)];
  auto [it, inserted] = step.state_probes.try_emplace(vector_key(s));
  if (inserted) {
    for (const auto& a : env_->actions(s)) it->second.push_back(step.cache.add(env_->joint(s, a)));
  }
  return it->second;
}

void KoviAgent::plan() {
  // Q_{h+1} at every probe of the next step, shared by all targets of step h.
  std::vector<double> next_q;
  for (int h = horizon_; h >= 1; --h) {
    StepData& step = steps_[static_cast<std::size_t>(h - 1)];
    const std::size_t t = step.posterior.size();
    if (t > 0) {
      std::vector<double> targets(t);
      for (std::size_t i = 0; i < t; ++i) {
        double v = 0.0;
        for (std::size_t p : step.next_probes[i]) v = std::max(v, next_q[p]);
        targets[i] = step.rewards[i] + v;
      }
      step.posterior.set_targets(std::move(targets));
    }
    step.cache.sync(step.posterior);
    if (h > 1) {
      const QEstimator q = estimator(h);
      next_q.resize(step.cache.size());
      const auto n = static_cast<std::ptrdiff_t>(next_q.size());
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t p = 0; p < n; ++p) next_q[static_cast<std::size_t>(p)] = q.q_probe(static_cast<std::size_t>(p));
    }
  }
}

std::vector<double> KoviAgent::q_values(int h, const Vector& s, std::span<const Vector> actions) {
  const auto& probes = probes_for(h, s);
  if (probes.size() != actions.size()) {
    throw std::logic_error("action set differs from the one registered for this state");
  }
  StepData& step = steps_[static_cast<std::size_t>(h - 1)];
  step.cache.sync(step.posterior);
  const QEstimator q = estimator(h);
  std::vector<double> out;
  out.reserve(probes.size());
  for (std::size_t p : probes) out.push_back(q.q_probe(p));
  return out;
}

std::vector<double> KoviAgent::q_values_fresh(int h, const Vector& s,
                                              std::span<const Vector> actions) const {
  const QEstimator q = estimator(h);
  std::vector<double> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(q.q_value(env_->joint(s, a)));
  return out;
}

std::size_t KoviAgent::act(int h, const Vector& s, std::span<const Vector> actions) {
  return greedy_index(q_values(h, s, actions));
}

void KoviAgent::record(int h, const Vector& s, const Vector& a, double reward, const Vector& next) {
  steps_.at(static_cast<std::size_t>(h - 1)).pending.push_back({env_->joint(s, a), reward, next});
}

void KoviAgent::end_episode() {
  for (int h = 1; h <= horizon_; ++h) {
    StepData& step = steps_[static_cast<std::size_t>(h - 1)];
    for (auto& tr : step.pending) {
      try {
        step.posterior.append(tr.z, tr.reward);
      } catch (const FactorizationError& e) {
        // Rebuild from scratch on numerical breakdown of the pivot.
        ++fallbacks_;
        std::fprintf(stderr, "kovi: step %d: %s; refitting\n", h, e.what());
        std::vector<Vector> inputs(step.posterior.inputs().begin(), step.posterior.inputs().end());
        std::vector<double> targets(step.posterior.targets().begin(), step.posterior.targets().end());
        inputs.push_back(tr.z);
        targets.push_back(tr.reward);
        step.posterior = fit(config_.kernel, inputs, targets, config_.lambda);
      }
      step.rewards.push_back(tr.reward);
      if (h < horizon_ && !env_->is_terminal(tr.next)) {
        step.next_probes.push_back(probes_for(h + 1, tr.next));
      } else {
        step.next_probes.emplace_back();
      }
    }
    step.pending.clear();
  }
  ++episodes_;
}

double rollout_return(EpisodicEnv& env, const Vector& s1, const PolicyFn& policy) {
  Vector s = s1;
  double total = 0.0;
  for (int h = 1; h <= env.horizon(); ++h) {
    const auto acts = env.actions(s);
    const auto res = env.step(h, s, acts.at(policy(h, s, acts)));
    total += res.reward;
    s = res.next;
    if (res.done) break;
  }
  return total;
}

ExperimentRecord run_kovi(EpisodicEnv& env, const KoviConfig& config, std::uint64_t run_seed,
                          const KoviHook& hook) {
  using Clock = std::chrono::steady_clock;
  KoviAgent agent(env, config);
  ExperimentRecord record;
  record.meta = {std::string(env.name()), "kovi", config.kernel.label(), config.beta,
                 config.lambda, run_seed};

  const PolicyFn greedy = [&agent, &env](int h, const Vector& s, std::span<const Vector> acts) {
    if (env.is_terminal(s)) return std::size_t{0};
    return agent.act(h, s, acts);
  };

  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    const auto start = Clock::now();
    agent.plan();
    if (hook) hook(episode, agent);

    Vector s = env.reset(episode, run_seed);
    const double v_star = env.optimal_value(s);
    const std::optional<double> exact = env.policy_value(s, greedy);

    double realized = 0.0;
    for (int h = 1; h <= env.horizon(); ++h) {
      const auto acts = env.actions(s);
      const Vector a = acts.at(greedy(h, s, acts));
      StepResult res = env.step(h, s, a);
      agent.record(h, s, a, res.reward, res.next);
      realized += res.reward;
      s = std::move(res.next);
    }
    agent.end_episode();

    if (auto score = env.final_objective(s)) {
      record.best_objective = std::max(record.best_objective.value_or(*score), *score);
    }
    const double ms = config.timing
        ? std::chrono::duration<double, std::milli>(Clock::now() - start).count()
        : 0.0;
    record.add(exact.value_or(realized), v_star, ms);
  }
  record.factorization_fallbacks = agent.fallbacks();
  return record;
}

}  // namespace symrl
