#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detrl/dqn.hpp"
#include "detrl/evalproto.hpp"
#include "detrl/sensitivity.hpp"

namespace detrl {

// Declarative experiment description, read from a JSON config file.
struct ExperimentConfig {
  std::vector<GroupKind> groups;
  int n_runs = 5;
  SeedSpec base_seeds;
  Hyperparams hp;
  EnvConfig env;
  std::string suite_path;         // start-state suite; empty = no evaluations
  std::string sticky_suite_path;  // required iff an environment group runs
  std::string output_dir;
  int parallelism = 0;  // 0 = auto
  SuiteGenParams suite_gen;
  long episode_cap = 200;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig load_experiment_config(const std::string& path);

// "field=value" overrides for SeedSpec fields, e.g. "init_seed=42".
void apply_seed_override(SeedSpec& seeds, const std::string& spec);

// Exit codes follow the command contracts: 0 success, 1 expected negative
// result (diverged verdict, generation shortfall), 2 usage/config errors.
int cmd_train(const std::string& config_path,
              const std::string& out_override = "",
              std::optional<int> parallelism_override = std::nullopt,
              const std::vector<std::string>& seed_overrides = {});

int cmd_verify(const std::string& log_a_path, const std::string& log_b_path);

int cmd_gen_suite(const std::string& config_path,
                  const std::string& ranker_path, std::uint64_t seed,
                  const std::string& out_path,
                  const std::string& kind = "start-states");

int cmd_report(const std::string& output_dir);

// Resolves --out, falling back to $DETRL_OUTPUT_DIR, then the config value.
std::string resolve_output_dir(const std::string& flag_value,
                               const std::string& config_value);

}  // namespace detrl
