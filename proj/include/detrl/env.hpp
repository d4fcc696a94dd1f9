#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detrl/rng.hpp"

namespace detrl {

enum class Action : int { kLeft = 0, kStay = 1, kRight = 2 };
inline constexpr int kNumActions = 3;

struct CatchState {
  int grid_w = 10;
  int grid_h = 10;
  int ball_col = 0;
  int ball_row = 0;
  int paddle_col = 0;
  int balls_elapsed = 0;
  long t = 0;
  bool terminal = false;
};

std::uint64_t state_digest(const CatchState& s);

struct EnvConfig {
  int grid_w = 10;
  int grid_h = 10;
  double sticky_p = 0.0;
  int max_noops = 8;     // grid_h - 2: no-ops can never lose a ball
  int episode_len = 10;  // balls per episode
  std::uint64_t env_instance_seed = 0;

  bool operator==(const EnvConfig&) const = default;
};

struct StepResult {
  double reward = 0.0;
  bool terminal = false;
};

// Deterministic Catch: a ball falls one row per step; the paddle on the
// bottom row moves one column per action. Catching scores +1, missing -1;
// the episode ends after episode_len balls. The ball columns of an episode
// are a pure function of (env_instance_seed, episode_index), so the raw
// environment is fully deterministic, like the p=0 ALE.
class CatchEnv {
 public:
  explicit CatchEnv(const EnvConfig& cfg);

  CatchState reset(std::uint64_t episode_index);
  StepResult step(Action a);  // throws std::logic_error after terminal

  const CatchState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }

  // Steps a ball needs to fall from the top to the bottom row.
  int steps_per_ball() const { return cfg_.grid_h - 1; }

 private:
  EnvConfig cfg_;
  CatchState state_;
  std::vector<int> ball_cols_;
};

// Executes the previous executed action with probability p instead of the
// chosen one. Exactly one uniform is consumed per wrapped step; on the first
// step of an episode the draw is ignored and the chosen action always runs.
class StickyWrapper {
 public:
  StickyWrapper(CatchEnv& env, double sticky_p, RandomStream& stream);

  void begin_episode() { prev_.reset(); }
  StepResult step(Action chosen);
  Action last_executed() const;

 private:
  CatchEnv& env_;
  double sticky_p_;
  RandomStream& stream_;
  std::optional<Action> prev_;
};

// Resets to episode_index, then applies k = next_int(max_noops+1) Stay
// actions on the raw environment. max_noops must be < grid_h - 1 so a no-op
// prefix can never consume a ball.
CatchState noop_start(CatchEnv& env, std::uint64_t episode_index,
                      int max_noops, RandomStream& noop_stream);

std::string action_name(Action a);

}  // namespace detrl
