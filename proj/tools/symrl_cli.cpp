// symrl: command line front end for KOVI and tabular Q-learning suites,
// quotient checks and kernel diagnostics.

#include "symrl/analysis.hpp"
#include "symrl/experiment.hpp"
#include "symrl/quotient.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace symrl;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::string seeds = "0..0";
  std::string out = "results";
  int jobs = 1;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "YAML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", opts.preset_name, "named preset applied before --config");
}

Config resolve(const CommonOptions& opts) {
  Config base = opts.preset_name.empty() ? Config{} : preset(opts.preset_name);
  Config c = opts.config_path.empty() ? base : load_config(opts.config_path, base);
  if (opts.timing) c.timing = true;
  c.validate();
  return c;
}

int run_suite_command(const CommonOptions& opts, Algorithm algorithm) {
  const Config config = resolve(opts);
  const auto seeds = parse_seed_range(opts.seeds);
  const SuiteResult result = run_suite(config, algorithm, seeds, opts.out, opts.jobs);
  const std::string name = suite_name(config, algorithm);
  for (std::size_t i = 0; i < result.seeds.size(); ++i) {
    if (const auto& r = result.records[i]) {
      std::string extra;
      if (r->best_objective) extra += fmt::format(" best_objective={}", *r->best_objective);
      if (!r->evaluations.empty()) extra += fmt::format(" final_test_return={}", r->evaluations.back().mean_return);
      if (r->factorization_fallbacks) extra += fmt::format(" refits={}", r->factorization_fallbacks);
      fmt::print("{} seed {}: cum_regret={}{}\n", name, result.seeds[i], r->cumulative_regret(), extra);
    }
  }
  for (const auto& e : result.errors) fmt::print(stderr, "error: {}\n", e);
  fmt::print("wrote {} run(s) to {}\n", result.completed().size(), opts.out);
  return result.ok() ? 0 : 1;
}

int quotient_check(const std::string& which) {
  bool all_ok = true;
  auto check = [&](const std::string& name, const EmbeddedModel& m) {
    const Quotient q = build_quotient(m.mdp, m.group, m.state_embed, m.action_embed);
    const ValueTables full = value_iteration(m.mdp);
    const ValueTables reduced = value_iteration(q.mdp);
    double value_gap = 0.0;
    for (int h = 0; h <= m.mdp.horizon; ++h) {
      for (std::size_t s = 0; s < m.mdp.num_states; ++s) {
        const double lifted = reduced.v[static_cast<std::size_t>(h)][q.partition.orbit_of[s]];
        value_gap = std::max(value_gap, std::abs(lifted - full.v[static_cast<std::size_t>(h)][s]));
      }
    }
    const auto lifted = lift_policy(greedy_policy(q.mdp, reduced), q.partition);
    const auto v_lifted = evaluate_policy(m.mdp, lifted);
    double policy_gap = 0.0;
    for (int h = 0; h <= m.mdp.horizon; ++h) {
      for (std::size_t s = 0; s < m.mdp.num_states; ++s) {
        policy_gap = std::max(policy_gap, std::abs(v_lifted[static_cast<std::size_t>(h)][s] -
                                                   full.v[static_cast<std::size_t>(h)][s]));
      }
    }
    const bool ok = value_gap <= 1e-10 && policy_gap <= 1e-10;
    all_ok = all_ok && ok;
    fmt::print("{}: states={} orbits={} max|V-V_quotient|={:.3g} max|V-V_lifted|={:.3g} {}\n", name,
               m.mdp.num_states, q.partition.count(), value_gap, policy_gap, ok ? "ok" : "MISMATCH");
  };
  if (which == "all" || which == "chain") check("sign_flip_chain", sign_flip_chain_model());
  if (which == "all" || which == "d4grid") check("d4_grid_toy", d4_grid_toy_model());
  return all_ok ? 0 : 1;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  return file;
}

int info_gain_command(const CommonOptions& opts, std::uint64_t seed, const std::string& path) {
  const Config c = resolve(opts);
  const auto& a = c.analysis;
  const auto family = parse_kernel_family(c.kernel.family);
  const auto points = uniform_points(a.candidates, 2, seed);
  const KernelSpec base(family, a.lengthscale);
  const KernelSpec inv(family, a.lengthscale, group_from_name(a.group, 2));
  const auto gb = greedy_info_gain(base, points, a.T, a.lambda);
  const auto gi = greedy_info_gain(inv, points, a.T, a.lambda);
  std::ofstream file;
  std::ostream& out = open_output(path, file);
  out << "T,gamma_base,gamma_invariant\n";
  double sb = 0.0;
  double si = 0.0;
  for (std::size_t t = 0; t < a.T; ++t) {
    sb += gb.increments[t];
    si += gi.increments[t];
    out << fmt::format("{},{},{}\n", t + 1, sb, si);
  }
  return 0;
}

int eigendecay_command(const CommonOptions& opts, std::uint64_t seed, const std::string& path) {
  const Config c = resolve(opts);
  const auto& a = c.analysis;
  const auto family = parse_kernel_family(c.kernel.family);
  const auto samples = uniform_points(a.samples, 2, seed);
  const auto eb = gram_eigen_decay(KernelSpec(family, a.lengthscale), samples);
  const auto ei = gram_eigen_decay(KernelSpec(family, a.lengthscale, group_from_name(a.group, 2)), samples);
  std::ofstream file;
  std::ostream& out = open_output(path, file);
  out << "index,eig_base,eig_invariant\n";
  for (std::size_t m = 0; m < eb.size(); ++m) out << fmt::format("{},{},{}\n", m + 1, eb[m], ei[m]);
  return 0;
}

int verify_groups() {
  const std::vector<FiniteGroup> groups = {trivial_group(2),     sign_flip_group(1),
                                           sign_flip_group(2),   d4_block_group(1),
                                           d4_block_group(7),    d4_block_group(17),
                                           extend_with_identity(d4_block_group(1), 1)};
  bool all_ok = true;
  for (const auto& g : groups) {
    const GroupReport report = verify_group(g);
    fmt::print("{} (|G|={}, d={}): {}\n", g.name(), g.size(), g.dim(), report.ok() ? "ok" : "FAILED");
    for (const auto& v : report.violations) fmt::print("  {}\n", v);
    all_ok = all_ok && report.ok();
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-aware kernel RL experiments"};
  app.require_subcommand(1);

  CommonOptions kovi_opts;
  auto* kovi = app.add_subcommand("run-kovi", "KOVI over a range of seeds");
  add_common(kovi, kovi_opts);
  kovi->add_option("--seeds", kovi_opts.seeds, "seed range a..b");
  kovi->add_option("--out", kovi_opts.out, "output directory");
  kovi->add_option("--jobs", kovi_opts.jobs, "seeds run concurrently")->check(CLI::PositiveNumber);
  kovi->add_flag("--timing", kovi_opts.timing, "record wall-clock ms per episode");

  CommonOptions tab_opts;
  auto* tab = app.add_subcommand("run-tabular", "tabular Q-learning over a range of seeds");
  add_common(tab, tab_opts);
  tab->add_option("--seeds", tab_opts.seeds, "seed range a..b");
  tab->add_option("--out", tab_opts.out, "output directory");
  tab->add_option("--jobs", tab_opts.jobs, "seeds run concurrently")->check(CLI::PositiveNumber);
  tab->add_flag("--timing", tab_opts.timing, "record wall-clock ms per episode");

  std::string model = "all";
  auto* quot = app.add_subcommand("quotient-check", "quotient MDP against the full model");
  quot->add_option("--model", model, "chain, d4grid or all")
      ->check(CLI::IsMember({"chain", "d4grid", "all"}));

  CommonOptions ig_opts;
  std::uint64_t ig_seed = 0;
  std::string ig_out;
  auto* ig = app.add_subcommand("info-gain", "greedy information gain, base vs invariant kernel");
  add_common(ig, ig_opts);
  ig->add_option("--seed", ig_seed, "candidate sampling seed");
  ig->add_option("--out", ig_out, "CSV path (stdout when omitted)");

  CommonOptions ed_opts;
  std::uint64_t ed_seed = 0;
  std::string ed_out;
  auto* ed = app.add_subcommand("eigendecay", "Gram eigenvalues, base vs invariant kernel");
  add_common(ed, ed_opts);
  ed->add_option("--seed", ed_seed, "sampling seed");
  ed->add_option("--out", ed_out, "CSV path (stdout when omitted)");

  auto* vg = app.add_subcommand("verify-groups", "check the group axioms of the built-in groups");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*kovi) return run_suite_command(kovi_opts, Algorithm::kovi);
    if (*tab) return run_suite_command(tab_opts, Algorithm::tabular);
    if (*quot) return quotient_check(model);
    if (*ig) return info_gain_command(ig_opts, ig_seed, ig_out);
    if (*ed) return eigendecay_command(ed_opts, ed_seed, ed_out);
    if (*vg) return verify_groups();
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
