#include "symrl/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace symrl {

namespace {

struct Location {
  const std::string& source;
  const YAML::Node& node;
  std::string where() const { return fmt::format("{}:{}", source, node.Mark().line + 1); }
};

template <typename T>
T read(const Location& loc, const std::string& key) {
  try {
    return loc.node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: '{}' has the wrong type", loc.where(), key));
  }
}

std::size_t read_count(const Location& loc, const std::string& key) {
  const auto v = read<long long>(loc, key);
  if (v < 0) throw ConfigError(fmt::format("{}: '{}' must be non-negative", loc.where(), key));
  return static_cast<std::size_t>(v);
}

using Setter = std::function<void(Config&, const Location&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"env",
       {{"name", [](Config& c, const Location& l, const std::string& k) { c.env.name = read<std::string>(l, k); }},
        {"seed", [](Config& c, const Location& l, const std::string& k) { c.env.seed = read<std::uint64_t>(l, k); }},
        {"H", [](Config& c, const Location& l, const std::string& k) { c.env.horizon = read<int>(l, k); }},
        {"grid_points", [](Config& c, const Location& l, const std::string& k) { c.env.grid_points = read<int>(l, k); }}}},
      {"synpl",
       {{"rollouts", [](Config& c, const Location& l, const std::string& k) { c.env.rollouts = read<int>(l, k); }}}},
      {"kernel",
       {{"family", [](Config& c, const Location& l, const std::string& k) { c.kernel.family = read<std::string>(l, k); }},
        {"lengthscale", [](Config& c, const Location& l, const std::string& k) { c.kernel.lengthscale = read<double>(l, k); }},
        {"group", [](Config& c, const Location& l, const std::string& k) { c.kernel.group = read<std::string>(l, k); }}}},
      {"krr",
       {{"lambda", [](Config& c, const Location& l, const std::string& k) { c.lambda = read<double>(l, k); }}}},
      {"kovi",
       {{"beta", [](Config& c, const Location& l, const std::string& k) { c.beta = read<double>(l, k); }},
        {"T", [](Config& c, const Location& l, const std::string& k) { c.T = read_count(l, k); }}}},
      {"tabular",
       {{"task", [](Config& c, const Location& l, const std::string& k) { c.task = read<std::string>(l, k); }},
        {"K", [](Config& c, const Location& l, const std::string& k) { c.tabular.episodes = read_count(l, k); }},
        {"c", [](Config& c, const Location& l, const std::string& k) { c.tabular.c = read<double>(l, k); }},
        {"p", [](Config& c, const Location& l, const std::string& k) { c.tabular.p = read<double>(l, k); }},
        {"augment", [](Config& c, const Location& l, const std::string& k) { c.tabular.augment = read<bool>(l, k); }}}},
      {"eval",
       {{"n_test", [](Config& c, const Location& l, const std::string& k) { c.eval.n_test = read_count(l, k); }},
        {"every", [](Config& c, const Location& l, const std::string& k) { c.eval.every = read_count(l, k); }}}},
      {"analysis",
       {{"candidates", [](Config& c, const Location& l, const std::string& k) { c.analysis.candidates = read_count(l, k); }},
        {"T", [](Config& c, const Location& l, const std::string& k) { c.analysis.T = read_count(l, k); }},
        {"lambda", [](Config& c, const Location& l, const std::string& k) { c.analysis.lambda = read<double>(l, k); }},
        {"lengthscale", [](Config& c, const Location& l, const std::string& k) { c.analysis.lengthscale = read<double>(l, k); }},
        {"samples", [](Config& c, const Location& l, const std::string& k) { c.analysis.samples = read_count(l, k); }},
        {"group", [](Config& c, const Location& l, const std::string& k) { c.analysis.group = read<std::string>(l, k); }}}},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void Config::validate() const {
  require(env.name == "synthetic" || env.name == "frozen_fixed" || env.name == "frozen_random" ||
              env.name == "synpl",
          fmt::format("env.name: unknown environment '{}'", env.name));
  require(!env.horizon || *env.horizon >= 1, "env.H must be >= 1");
  require(env.grid_points >= 2, "env.grid_points must be >= 2");
  require(env.rollouts >= 1, "synpl.rollouts must be >= 1");
  try {
    parse_kernel_family(kernel.family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("kernel.family: {}", e.what()));
  }
  require(kernel.lengthscale > 0.0 && std::isfinite(kernel.lengthscale),
          "kernel.lengthscale must be positive");
  require(lambda > 0.0 && std::isfinite(lambda), "krr.lambda must be positive");
  require(beta >= 0.0 && std::isfinite(beta), "kovi.beta must be >= 0");
  require(T >= 1, "kovi.T must be >= 1");
  require(tabular.episodes >= 1, "tabular.K must be >= 1");
  require(tabular.c >= 0.0, "tabular.c must be >= 0");
  require(tabular.p > 0.0 && tabular.p < 1.0, "tabular.p must lie in (0, 1)");
  require(eval.n_test >= 1, "eval.n_test must be >= 1");
  require(eval.every >= 1, "eval.every must be >= 1");
  require(analysis.candidates >= analysis.T, "analysis.candidates must be >= analysis.T");
  require(analysis.lambda > 0.0, "analysis.lambda must be positive");
  require(analysis.lengthscale > 0.0, "analysis.lengthscale must be positive");
  require(analysis.samples >= 2, "analysis.samples must be >= 2");
}

KernelSpec Config::kernel_spec(Eigen::Index dim, const FiniteGroup* env_group) const {
  const KernelFamily family = parse_kernel_family(kernel.family);
  if (kernel.group == "none") return KernelSpec(family, kernel.lengthscale);
  if (kernel.group == "env") {
    if (env_group == nullptr) throw ConfigError("kernel.group 'env' needs an environment");
    return KernelSpec(family, kernel.lengthscale, *env_group);
  }
  try {
    return KernelSpec(family, kernel.lengthscale, group_from_name(kernel.group, dim));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("kernel.group: {}", e.what()));
  }
}

KoviConfig Config::kovi(const EpisodicEnv& env) const {
  KoviConfig k;
  k.beta = beta;
  k.lambda = lambda;
  k.kernel = kernel_spec(env.embed_dim(), &env.group());
  k.episodes = T;
  k.timing = timing;
  return k;
}

std::vector<std::string> preset_names() {
  return {"synthetic_invariant", "synthetic_rbf",          "frozen_fixed_invariant",
          "frozen_fixed_rbf",    "frozen_random_invariant", "frozen_random_rbf",
          "synpl_invariant",     "synpl_rbf",               "synpl_invariant_tuned",
          "synpl_rbf_tuned",     "gridworld_plain",         "gridworld_augmented"};
}

Config preset(const std::string& name) {
  Config c;
  c.name = name;
  if (name.starts_with("synthetic_")) {
    c.env.name = "synthetic";
    c.beta = 0.1;
    c.kernel.lengthscale = 1.0;
    c.lambda = std::exp(-10.0);
    c.T = 1000;
    c.kernel.group = name == "synthetic_invariant" ? "sign_flip" : "none";
  } else if (name.starts_with("frozen_")) {
    const bool invariant = name.ends_with("_invariant");
    const bool fixed = name.starts_with("frozen_fixed");
    c.env.name = fixed ? "frozen_fixed" : "frozen_random";
    c.beta = 0.01;
    c.lambda = 0.01;
    c.T = 300;
    c.kernel.group = invariant ? "d4:7" : "none";
    c.kernel.lengthscale = invariant ? 0.5 : (fixed ? 0.1 : 1.0);
  } else if (name.starts_with("synpl_")) {
    const bool invariant = name.starts_with("synpl_invariant");
    c.env.name = "synpl";
    c.beta = invariant ? 0.1 : 0.05;
    c.kernel.lengthscale = 1.0;
    c.lambda = 1e-6;
    c.T = 500;
    c.kernel.group = invariant ? "d4:17" : "none";
    // grid search over beta, lengthscale, lambda on seeds 100..104; the rbf
    // optimum is the untuned setting
    if (name == "synpl_invariant_tuned") {
      c.beta = 1.0;
      c.kernel.lengthscale = 2.0;
      c.lambda = 0.01;
    }
  } else if (name.starts_with("gridworld_")) {
    c.task = "reflection_grid";
    c.tabular.episodes = 5000;
    c.tabular.c = 0.02;
    c.tabular.p = 0.05;
    c.tabular.augment = name == "gridworld_augmented";
  }
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
  return c;
}

Config parse_config(const std::string& text, const std::string& source, Config base) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: parse error: {}", source, e.mark.line + 1, e.msg));
  }
  if (root.IsNull()) {
    base.validate();
    return base;
  }
  if (!root.IsMap()) {
    throw ConfigError(fmt::format("{}:{}: top level must be a mapping", source, root.Mark().line + 1));
  }
  if (const auto p = root["preset"]) base = preset(read<std::string>({source, p}, "preset"));

  for (const auto& section : root) {
    const auto key = section.first.as<std::string>();
    const Location loc{source, section.second};
    if (key == "preset") continue;
    if (key == "name") {
      base.name = read<std::string>(loc, key);
      continue;
    }
    if (key == "timing") {
      base.timing = read<bool>(loc, key);
      continue;
    }
    const auto it = schema().find(key);
    if (it == schema().end()) {
      throw ConfigError(fmt::format("{}:{}: unknown key '{}'", source, section.first.Mark().line + 1, key));
    }
    if (!section.second.IsMap()) {
      throw ConfigError(fmt::format("{}: '{}' must be a mapping", loc.where(), key));
    }
    for (const auto& entry : section.second) {
      const auto sub = entry.first.as<std::string>();
      const auto setter = it->second.find(sub);
      const std::string full = key + "." + sub;
      if (setter == it->second.end()) {
        throw ConfigError(fmt::format("{}:{}: unknown key '{}'", source, entry.first.Mark().line + 1, full));
      }
      setter->second(base, Location{source, entry.second}, full);
    }
  }
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string(), std::move(base));
}

}  // namespace symrl
