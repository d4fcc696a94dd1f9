#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "detrl/dqn.hpp"
#include "detrl/evalproto.hpp"
#include "detrl/runlog.hpp"

namespace detrl {

// The six experimental groups: a fully deterministic baseline plus one group
// per nondeterminism source, each varying exactly that source across runs.
enum class GroupKind {
  kDeterministic,
  kCompute,
  kEnvironment,
  kExploration,
  kInitialization,
  kMinibatch,
};

const char* group_name(GroupKind kind);
GroupKind group_kind_from_name(const std::string& name);
std::vector<GroupKind> all_group_kinds();

struct GroupSpec {
  GroupKind kind = GroupKind::kDeterministic;
  SeedSpec base_seeds;
  int n_runs = 5;
  Hyperparams hp;
  EnvConfig env;
};

// Applies the canonical per-group settings to base hp/env: the environment
// group trains with sticky_p = 0.25 and anneals eps to 0.01; every other
// group trains with sticky_p = 0 and the base eps_end.
GroupSpec make_group_spec(GroupKind kind, const SeedSpec& base_seeds,
                          const Hyperparams& base_hp, const EnvConfig& base_env,
                          int n_runs = 5);

// One config per run. Varied seeds are base_seed + run_index; the compute
// group varies compute_seed under PerturbedReduction; the deterministic
// group repeats the base config verbatim. Validates the group invariants
// (e.g. an environment group with sticky_p = 0 is an error).
std::vector<AgentRunConfig> build_group_configs(const GroupSpec& spec);

struct IntervalStats {
  long step = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double rel_std = 0.0;  // NaN when mean == 0
  bool rel_std_defined = true;
};

struct RunBest {
  int run = 0;
  long step_of_best = 0;
  double best_score = 0.0;
};

struct GroupReport {
  GroupKind kind = GroupKind::kDeterministic;
  bool has_evaluations = false;
  std::vector<IntervalStats> per_interval;
  IntervalStats final_stats;
  IntervalStats best_stats;
  std::vector<RunBest> per_run_best;
  int completed_runs = 0;
  int diverged_runs = 0;
};

// Pure function of the logs, recomputable offline. Per-interval statistics
// are over the runs' mean evaluation scores; best statistics are over each
// run's maximum across intervals.
GroupReport compute_group_report(GroupKind kind,
                                 const std::vector<RunLog>& logs);

struct GroupResult {
  GroupSpec spec;
  std::vector<RunLog> logs;
  std::vector<QNetwork> final_nets;  // one per run, training endpoint
  GroupReport report;
};

// Runs every config of the group (up to `parallelism` at a time; 0 = one
// thread per core) and assembles the report. The environment group
// evaluates on sticky_suite, all others on start_suite; either may be null
// to skip evaluations.
GroupResult run_group(const GroupSpec& spec, const EvalSuite* start_suite,
                      const EvalSuite* sticky_suite, int parallelism = 0);

nlohmann::json group_report_to_json(const GroupReport& report);

}  // namespace detrl
