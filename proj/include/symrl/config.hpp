#pragma once

// Run configuration: YAML files, named presets and range checks.

#include "symrl/envs.hpp"
#include "symrl/kovi.hpp"
#include "symrl/tabular.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace symrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KernelConfig {
  std::string family = "rbf";
  double lengthscale = 1.0;
  // none | env | identity | sign_flip | d4:<blocks>; "env" takes the
  // environment's own group.
  std::string group = "none";
};

struct EvalConfig {
  std::size_t n_test = 40;
  std::size_t every = 10;
};

struct AnalysisConfig {
  std::size_t candidates = 200;
  std::size_t T = 50;
  double lambda = 0.1;
  double lengthscale = 0.5;
  std::size_t samples = 200;
  std::string group = "sign_flip";
};

struct Config {
  std::string name;
  EnvConfig env;
  KernelConfig kernel;
  double lambda = 0.01;
  double beta = 0.1;
  std::size_t T = 100;
  std::string task = "reflection_grid";
  TabularConfig tabular;
  EvalConfig eval;
  AnalysisConfig analysis;
  bool timing = false;

  /// Throws ConfigError for values outside their domain.
  void validate() const;

  /// Kernel for an embedding of dimension `dim`; `env_group` backs the "env"
  /// group name.
  KernelSpec kernel_spec(Eigen::Index dim, const FiniteGroup* env_group = nullptr) const;
  KoviConfig kovi(const EpisodicEnv& env) const;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();

/// Fully resolved configuration of a named preset; throws ConfigError for
/// unknown names.
Config preset(const std::string& name);

/// Overlays YAML text onto `base`. A top-level `preset` key replaces `base`
/// by that preset before the remaining keys apply. Errors carry
/// `source:line`.
Config parse_config(const std::string& text, const std::string& source, Config base = {});

/// Reads and parses a YAML file; see parse_config.
Config load_config(const std::filesystem::path& path, Config base = {});

}  // namespace symrl
