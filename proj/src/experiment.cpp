#include "symrl/experiment.hpp"

#include "symrl/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace symrl {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

}  // namespace

double evaluate_test_envs(const PolicyFn& policy, std::size_t n_test, std::uint64_t seed,
                          int horizon) {
  if (n_test == 0) throw std::invalid_argument("evaluate_test_envs: n_test must be positive");
  Rng rng = make_rng(seed, "eval");
  FrozenLakeEnv env(FrozenLakeEnv::Mode::random, seed, horizon);
  double total = 0.0;
  for (std::size_t i = 0; i < n_test; ++i) {
    const Vector s1 = FrozenLakeEnv::sample_layout(rng).to_state();
    total += rollout_return(env, s1, policy);
  }
  return total / static_cast<double>(n_test);
}

ExperimentRecord run_single(const Config& config, Algorithm algorithm, std::uint64_t seed) {
  if (algorithm == Algorithm::tabular) {
    TabularConfig tc = config.tabular;
    tc.timing = config.timing;
    return run_tabular(make_tabular_task(config.task), tc, seed);
  }
  EnvConfig ec = config.env;
  ec.seed = stream_seed(seed, "instance", config.env.seed);
  auto env = make_env(ec);
  const KoviConfig kc = config.kovi(*env);

  if (ec.name != "frozen_random") return run_kovi(*env, kc, seed);

  std::vector<EvaluationRow> evaluations;
  const int horizon = env->horizon();
  const auto hook = [&](std::size_t episode, KoviAgent& agent) {
    if (episode % config.eval.every != 0) return;
    const PolicyFn greedy = [&](int h, const Vector& s, std::span<const Vector> acts) {
      if (env->is_terminal(s)) return std::size_t{0};
      return agent.act(h, s, acts);
    };
    evaluations.push_back({episode, evaluate_test_envs(greedy, config.eval.n_test, seed, horizon)});
  };
  ExperimentRecord record = run_kovi(*env, kc, seed, hook);
  record.evaluations = std::move(evaluations);
  return record;
}

std::vector<AggregateRow> aggregate(std::span<const ExperimentRecord> records) {
  std::vector<AggregateRow> out;
  if (records.empty()) return out;
  const std::size_t length = records.front().rows.size();
  for (const auto& r : records) {
    if (r.rows.size() != length) throw std::invalid_argument("aggregate: records differ in length");
  }
  const auto n = static_cast<double>(records.size());
  for (std::size_t e = 0; e < length; ++e) {
    double sum = 0.0;
    for (const auto& r : records) sum += r.rows[e].cum_regret;
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& r : records) sq += (r.rows[e].cum_regret - mean) * (r.rows[e].cum_regret - mean);
    const double se = records.size() > 1 ? std::sqrt(sq / (n - 1.0)) / std::sqrt(n) : 0.0;
    out.push_back({e, mean, se, records.size()});
  }
  return out;
}

std::string record_csv(const ExperimentRecord& record) {
  std::string out = "episode,return,v_star,regret,cum_regret,ms\n";
  for (const auto& r : record.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.episode, r.ret, r.v_star, r.regret, r.cum_regret, r.ms);
  }
  return out;
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::string out = "episode,mean_cum_regret,stderr_cum_regret,n_seeds\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", r.episode, r.mean_cum_regret, r.stderr_cum_regret, r.n_seeds);
  }
  return out;
}

std::string evaluation_csv(const ExperimentRecord& record) {
  std::string out = "episode,mean_return\n";
  for (const auto& r : record.evaluations) out += fmt::format("{},{}\n", r.episode, r.mean_return);
  return out;
}

std::string metadata_json(const ExperimentRecord& record) {
  nlohmann::ordered_json j;
  j["env"] = record.meta.env;
  j["algorithm"] = record.meta.algorithm;
  j["kernel"] = record.meta.kernel;
  j["beta"] = record.meta.beta;
  j["lambda"] = record.meta.lambda;
  j["seed"] = record.meta.seed;
  j["episodes"] = record.rows.size();
  j["cum_regret"] = record.cumulative_regret();
  j["factorization_fallbacks"] = record.factorization_fallbacks;
  if (record.best_objective) j["best_objective"] = *record.best_objective;
  return j.dump(2) + "\n";
}

std::vector<ExperimentRecord> SuiteResult::completed() const {
  std::vector<ExperimentRecord> out;
  for (const auto& r : records) {
    if (r) out.push_back(*r);
  }
  return out;
}

std::string suite_name(const Config& config, Algorithm algorithm) {
  if (!config.name.empty()) return config.name;
  if (algorithm == Algorithm::tabular) {
    return fmt::format("qlearning{}_{}", config.tabular.augment ? "_augmented" : "", config.task);
  }
  return fmt::format("kovi_{}", config.env.name);
}

SuiteResult run_suite(const Config& config, Algorithm algorithm,
                      std::span<const std::uint64_t> seeds, const std::filesystem::path& out,
                      int jobs) {
  std::filesystem::create_directories(out);
  const std::string name = suite_name(config, algorithm);
  SuiteResult result;
  result.seeds.assign(seeds.begin(), seeds.end());
  result.records.resize(seeds.size());
  std::vector<std::string> errors(seeds.size());

  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs < 1 ? 1 : jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::uint64_t seed = seeds[idx];
    try {
      ExperimentRecord record = run_single(config, algorithm, seed);
      const auto stem = out / fmt::format("{}_seed{}", name, seed);
      write_file(stem.string() + ".csv", record_csv(record));
      write_file(stem.string() + ".json", metadata_json(record));
      if (!record.evaluations.empty()) write_file(stem.string() + "_eval.csv", evaluation_csv(record));
      result.records[idx] = std::move(record);
    } catch (const std::exception& e) {
      errors[idx] = fmt::format("seed {}: {}", seed, e.what());
    }
  }
  for (auto& e : errors) {
    if (!e.empty()) result.errors.push_back(std::move(e));
  }
  const auto done = result.completed();
  if (!done.empty()) {
    write_file(out / fmt::format("{}_aggregate.csv", name), aggregate_csv(aggregate(done)));
  }
  return result;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto parse = [&](const std::string& part) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || part.front() == '-') {
      throw std::invalid_argument(fmt::format("bad seed range '{}' (expected a..b or a)", text));
    }
    return static_cast<std::uint64_t>(v);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {parse(text)};
  const std::uint64_t a = parse(text.substr(0, dots));
  const std::uint64_t b = parse(text.substr(dots + 2));
  if (b < a) throw std::invalid_argument(fmt::format("empty seed range '{}'", text));
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
  return seeds;
}

}  // namespace symrl
