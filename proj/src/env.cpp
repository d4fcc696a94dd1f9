#include "detrl/env.hpp"

#include <algorithm>
#include <stdexcept>

#include "detrl/digest.hpp"

namespace detrl {

std::uint64_t state_digest(const CatchState& s) {
  Fnv1a64 h;
  h.update_i32(s.grid_w);
  h.update_i32(s.grid_h);
  h.update_i32(s.ball_col);
  h.update_i32(s.ball_row);
  h.update_i32(s.paddle_col);
  h.update_i32(s.balls_elapsed);
  h.update_u64(static_cast<std::uint64_t>(s.t));
  h.update_u32(s.terminal ? 1u : 0u);
  return h.digest();
}

CatchEnv::CatchEnv(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg.grid_w < 2 || cfg.grid_h < 3)
    throw std::invalid_argument("grid too small for Catch");
  if (cfg.sticky_p < 0.0 || cfg.sticky_p > 1.0)
    throw std::invalid_argument("sticky_p must be in [0,1]");
  if (cfg.episode_len < 1)
    throw std::invalid_argument("episode_len must be >= 1");
  if (cfg.max_noops < 0 || cfg.max_noops >= cfg.grid_h - 1)
    throw std::invalid_argument("max_noops must be in [0, grid_h-2]");
  state_.terminal = true;  // unusable until reset
}

CatchState CatchEnv::reset(std::uint64_t episode_index) {
  RandomStream cols("env-episode",
                    derive_seed(cfg_.env_instance_seed, episode_index));
  ball_cols_.resize(static_cast<std::size_t>(cfg_.episode_len));
  for (auto& c : ball_cols_)
    c = static_cast<int>(cols.next_int(static_cast<std::uint64_t>(cfg_.grid_w)));
  state_ = CatchState{};
  state_.grid_w = cfg_.grid_w;
  state_.grid_h = cfg_.grid_h;
  state_.ball_col = ball_cols_[0];
  state_.ball_row = 0;
  state_.paddle_col = cfg_.grid_w / 2;
  state_.balls_elapsed = 0;
  state_.t = 0;
  state_.terminal = false;
  return state_;
}

StepResult CatchEnv::step(Action a) {
  if (state_.terminal)
    throw std::logic_error("CatchEnv::step called after terminal");
  int delta = 0;
  switch (a) {
    case Action::kLeft: delta = -1; break;
    case Action::kStay: delta = 0; break;
    case Action::kRight: delta = 1; break;
    default: throw std::invalid_argument("invalid action");
  }
  state_.paddle_col =
      std::clamp(state_.paddle_col + delta, 0, cfg_.grid_w - 1);
  state_.ball_row += 1;
  state_.t += 1;

  StepResult result;
  if (state_.ball_row == cfg_.grid_h - 1) {
    result.reward = state_.ball_col == state_.paddle_col ? 1.0 : -1.0;
    state_.balls_elapsed += 1;
    if (state_.balls_elapsed == cfg_.episode_len) {
      state_.terminal = true;
      result.terminal = true;
    } else {
      state_.ball_row = 0;
      state_.ball_col = ball_cols_[static_cast<std::size_t>(state_.balls_elapsed)];
    }
  }
  return result;
}

StickyWrapper::StickyWrapper(CatchEnv& env, double sticky_p,
                             RandomStream& stream)
    : env_(env), sticky_p_(sticky_p), stream_(stream) {
  if (sticky_p < 0.0 || sticky_p > 1.0)
    throw std::invalid_argument("sticky_p must be in [0,1]");
}

StepResult StickyWrapper::step(Action chosen) {
  const double u = stream_.next_uniform();
  Action executed = chosen;
  if (prev_.has_value() && u < sticky_p_) executed = *prev_;
  prev_ = executed;
  return env_.step(executed);
}

Action StickyWrapper::last_executed() const {
  if (!prev_.has_value())
    throw std::logic_error("no action executed yet this episode");
  return *prev_;
}

CatchState noop_start(CatchEnv& env, std::uint64_t episode_index,
                      int max_noops, RandomStream& noop_stream) {
  if (max_noops < 0 || max_noops >= env.config().grid_h - 1)
    throw std::invalid_argument("max_noops must be in [0, grid_h-2]");
  env.reset(episode_index);
  const std::uint64_t k =
      noop_stream.next_int(static_cast<std::uint64_t>(max_noops) + 1);
  for (std::uint64_t i = 0; i < k; ++i) env.step(Action::kStay);
  return env.state();
}

std::string action_name(Action a) {
  switch (a) {
    case Action::kLeft: return "left";
    case Action::kStay: return "stay";
    case Action::kRight: return "right";
  }
  return "invalid";
}

}  // namespace detrl
