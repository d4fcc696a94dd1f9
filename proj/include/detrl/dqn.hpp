#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "detrl/env.hpp"
#include "detrl/network.hpp"
#include "detrl/replay.hpp"
#include "detrl/rng.hpp"
#include "detrl/runlog.hpp"

namespace detrl {

struct EvalSuite;  // evalproto.hpp

// Desk-scale defaults. The corresponding large-scale values of record
// (anneal over 1M steps, 20M total steps, eval every 250K, 1M replay) are
// documented in the README; they are impractical on a laptop and the
// absolute scores of the original Breakout study are out of reach anyway.
struct Hyperparams {
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.1;  // 0.01 for stochastic-environment runs
  long eps_anneal_steps = 5000;
  long target_sync_interval = 500;
  int batch_size = 32;
  int train_every = 4;
  long total_steps = 50000;
  long eval_interval = 1000;
  int learn_start = 500;
  long replay_capacity = 10000;
  std::vector<int> hidden_sizes = {64, 64};
  float learning_rate = 2.5e-4f;
  float rms_decay = 0.95f;
  float rms_epsilon = 2.5e-6f;  // 0.01 * learning_rate

  bool operator==(const Hyperparams&) const = default;
};

struct AgentRunConfig {
  SeedSpec seeds;
  Hyperparams hp;
  EnvConfig env;
  ComputeKind compute_kind = ComputeKind::kDeterministic;

  bool operator==(const AgentRunConfig&) const = default;
};

// Two concatenated one-hot grids: ball position (grid_w*grid_h) then paddle
// column (grid_w). Injective on reachable board configurations.
std::vector<float> featurize(const CatchState& s);
int feature_length(const EnvConfig& cfg);

double epsilon_at(long t, const Hyperparams& hp);

// Draw contract: one uniform is consumed every call; the action integer is
// drawn only when the uniform falls below eps. This keeps exploration-stream
// consumption aligned across runs until policies actually diverge.
int select_action(const QNetwork& net, std::span<const float> features,
                  double eps, RandomStream& exploration_stream,
                  const ComputeMode& mode = {});

struct ActionChoice {
  int action = 0;
  bool explored = false;
};

ActionChoice select_action_ex(const QNetwork& net,
                              std::span<const float> features, double eps,
                              RandomStream& exploration_stream,
                              const ComputeMode& mode = {});

// y_i = r_i + (terminal_i ? 0 : gamma * max_a' Q(s'_i, a'; target)).
std::vector<float> td_targets(const QNetwork& target_net,
                              std::span<const Transition* const> minibatch,
                              double gamma, const ComputeMode& mode = {});

// Optional per-step instrumentation for draw-alignment tests.
struct TrainTrace {
  std::vector<int> chosen_actions;
  std::vector<std::uint8_t> explored;  // 1 iff the step's action was random
  std::vector<std::vector<std::uint64_t>> minibatch_indices;
};

// Runs the full training loop: per-episode no-op starts, eps-greedy acting,
// sticky wrapping iff env.sticky_p > 0, replay, periodic updates and target
// syncs, and a checkpoint (weight hash + stream draw counts + evaluation if
// a suite is given) at step 0 and every eval_interval steps. The returned
// RunLog is a pure function of the config when compute is deterministic.
RunLog train_run(const AgentRunConfig& cfg, const EvalSuite* suite = nullptr,
                 TrainTrace* trace = nullptr,
                 QNetwork* final_net_out = nullptr);

// Canonical JSON forms; the config fingerprint hashes the canonical dump.
nlohmann::json seeds_to_json(const SeedSpec& s);
SeedSpec seeds_from_json(const nlohmann::json& j);
nlohmann::json hyperparams_to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& cfg);
EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const AgentRunConfig& cfg);
AgentRunConfig run_config_from_json(const nlohmann::json& j);
std::string config_fingerprint(const AgentRunConfig& cfg);

}  // namespace detrl
