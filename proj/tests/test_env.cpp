#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "detrl/dqn.hpp"
#include "detrl/env.hpp"
#include "detrl/rng.hpp"

using namespace detrl;

TEST_CASE("reset is deterministic and centers the paddle") {
  EnvConfig cfg;
  CatchEnv a(cfg), b(cfg);
  const CatchState sa = a.reset(4);
  const CatchState sb = b.reset(4);
  CHECK(state_digest(sa) == state_digest(sb));
  CHECK(sa.paddle_col == cfg.grid_w / 2);
  CHECK(sa.ball_row == 0);
  CHECK(sa.balls_elapsed == 0);
}

TEST_CASE("episode indices change the ball column sequence") {
  EnvConfig cfg;
  CatchEnv a(cfg), b(cfg);
  a.reset(0);
  b.reset(1);
  // Roll both episodes with Stay and compare ball columns per ball.
  bool any_differs = a.state().ball_col != b.state().ball_col;
  for (int ball = 0; ball < cfg.episode_len && !any_differs; ++ball) {
    for (int s = 0; s < cfg.grid_h - 1; ++s) {
      a.step(Action::kStay);
      b.step(Action::kStay);
    }
    if (!a.state().terminal && a.state().ball_col != b.state().ball_col)
      any_differs = true;
    if (a.state().terminal) break;
  }
  CHECK(any_differs);
}

TEST_CASE("ball above paddle caught by staying") {
  EnvConfig cfg;
  CatchEnv env(cfg);
  env.reset(0);
  // Steer the paddle under the ball first, then stay.
  const int target = env.state().ball_col;
  double total = 0.0;
  for (int s = 0; s < cfg.grid_h - 1; ++s) {
    Action a = Action::kStay;
    if (env.state().paddle_col < target) a = Action::kRight;
    if (env.state().paddle_col > target) a = Action::kLeft;
    total += env.step(a).reward;
  }
  // Paddle starts at most grid_w/2 away; grid_h-1 steps always suffice
  // on the default 10x10 grid.
  CHECK(total == 1.0);
  CHECK(env.state().balls_elapsed == 1);
}

TEST_CASE("unreachable ball scores -1 on that ball") {
  EnvConfig cfg;
  CatchEnv env(cfg);
  // Find an episode whose first ball is far from center.
  std::uint64_t episode = 0;
  for (;; ++episode) {
    env.reset(episode);
    if (env.state().ball_col == 0 || env.state().ball_col == cfg.grid_w - 1)
      break;
  }
  // Walk the paddle the wrong way the whole time.
  const Action away =
      env.state().ball_col == 0 ? Action::kRight : Action::kLeft;
  double total = 0.0;
  for (int s = 0; s < cfg.grid_h - 1; ++s) total += env.step(away).reward;
  CHECK(total == -1.0);
}

TEST_CASE("episode reward is bounded by episode_len") {
  EnvConfig cfg;
  cfg.episode_len = 3;
  CatchEnv env(cfg);
  RandomStream actions = new_stream("act", 5);
  env.reset(9);
  double total = 0.0;
  while (!env.state().terminal)
    total += env.step(static_cast<Action>(actions.next_int(3))).reward;
  CHECK(total >= -cfg.episode_len);
  CHECK(total <= cfg.episode_len);
  CHECK(env.state().t == cfg.episode_len * (cfg.grid_h - 1));
}

TEST_CASE("step after terminal is a contract violation") {
  EnvConfig cfg;
  cfg.episode_len = 1;
  CatchEnv env(cfg);
  env.reset(0);
  while (!env.state().terminal) env.step(Action::kStay);
  CHECK_THROWS_AS(env.step(Action::kStay), std::logic_error);
}

TEST_CASE("raw environment is a pure function of (cfg, episode, actions)") {
  EnvConfig cfg;
  RandomStream actions = new_stream("act", 1234);
  std::vector<Action> plan;
  for (int i = 0; i < 90; ++i)
    plan.push_back(static_cast<Action>(actions.next_int(3)));

  auto run = [&](std::uint64_t episode) {
    CatchEnv env(cfg);
    env.reset(episode);
    std::vector<std::uint64_t> digests;
    double total = 0.0;
    for (Action a : plan) {
      if (env.state().terminal) break;
      total += env.step(a).reward;
      digests.push_back(state_digest(env.state()));
    }
    return std::pair{digests, total};
  };
  CHECK(run(7) == run(7));
}

TEST_CASE("sticky_p=1 repeats the first action forever") {
  EnvConfig cfg;
  cfg.sticky_p = 1.0;
  CatchEnv env(cfg);
  env.reset(0);
  RandomStream sticky = new_stream("sticky", 3);
  StickyWrapper wrapper(env, 1.0, sticky);
  wrapper.begin_episode();
  wrapper.step(Action::kRight);
  CHECK(wrapper.last_executed() == Action::kRight);
  const int before = env.state().paddle_col;
  for (int i = 0; i < 4; ++i) wrapper.step(Action::kLeft);
  CHECK(wrapper.last_executed() == Action::kRight);
  CHECK(env.state().paddle_col >= before);  // kept moving right (clamped)
}

TEST_CASE("sticky wrapper consumes exactly one uniform per step") {
  EnvConfig cfg;
  cfg.sticky_p = 0.25;
  CatchEnv env(cfg);
  env.reset(0);
  RandomStream sticky = new_stream("sticky", 11);
  StickyWrapper wrapper(env, 0.25, sticky);
  wrapper.begin_episode();
  for (int i = 1; i <= 8; ++i) {
    wrapper.step(Action::kStay);
    CHECK(sticky.draw_count() == static_cast<std::uint64_t>(i));
  }
}

TEST_CASE("sticky repeat frequency over 1e5 steps is near 0.25") {
  EnvConfig cfg;
  cfg.sticky_p = 0.25;
  cfg.episode_len = 1000000;  // keep one episode alive throughout
  CatchEnv env(cfg);
  RandomStream sticky = new_stream("sticky", 20240229);
  StickyWrapper wrapper(env, 0.25, sticky);
  env.reset(0);
  wrapper.begin_episode();
  wrapper.step(Action::kStay);
  long repeats = 0;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    // Choose an action different from the previous executed one, so an
    // executed repeat can only come from the wrapper override.
    const Action prev = wrapper.last_executed();
    const Action chosen = prev == Action::kLeft ? Action::kRight : Action::kLeft;
    wrapper.step(chosen);
    if (wrapper.last_executed() == prev) ++repeats;
  }
  const double freq = static_cast<double>(repeats) / static_cast<double>(n);
  CHECK(freq > 0.24);
  CHECK(freq < 0.26);
}

TEST_CASE("noop_start: zero max_noops returns the reset state") {
  EnvConfig cfg;
  CatchEnv env(cfg);
  RandomStream noop = new_stream("noop", 5);
  const CatchState direct = CatchEnv(cfg).reset(3);
  const CatchState with_noops = noop_start(env, 3, 0, noop);
  CHECK(state_digest(direct) == state_digest(with_noops));
  CHECK(noop.draw_count() >= 1);  // the k draw still happens
}

TEST_CASE("noop_start: k no-ops advance the ball k rows") {
  EnvConfig cfg;
  RandomStream noop = new_stream("noop", 77);
  CatchEnv env(cfg);
  const CatchState s = noop_start(env, 0, cfg.max_noops, noop);
  CHECK(s.ball_row >= 0);
  CHECK(s.ball_row <= cfg.max_noops);
  CHECK(s.t == s.ball_row);
  CHECK(s.balls_elapsed == 0);  // no-ops can never consume a ball
}

TEST_CASE("noop_start: same seed gives same k sequence across episodes") {
  EnvConfig cfg;
  auto roll = [&] {
    RandomStream noop = new_stream("noop", 31);
    CatchEnv env(cfg);
    std::vector<int> ks;
    for (std::uint64_t e = 0; e < 20; ++e)
      ks.push_back(noop_start(env, e, cfg.max_noops, noop).ball_row);
    return ks;
  };
  const auto a = roll();
  CHECK(a == roll());
  bool varied = false;
  for (int k : a)
    if (k != a.front()) varied = true;
  CHECK(varied);
}

TEST_CASE("featurization is injective on board configurations") {
  EnvConfig cfg;
  cfg.grid_w = 5;
  cfg.grid_h = 5;
  std::set<std::vector<float>> seen;
  int count = 0;
  CatchState s;
  s.grid_w = cfg.grid_w;
  s.grid_h = cfg.grid_h;
  for (int ball_row = 0; ball_row < cfg.grid_h; ++ball_row)
    for (int ball_col = 0; ball_col < cfg.grid_w; ++ball_col)
      for (int paddle = 0; paddle < cfg.grid_w; ++paddle) {
        s.ball_row = ball_row;
        s.ball_col = ball_col;
        s.paddle_col = paddle;
        seen.insert(featurize(s));
        ++count;
      }
  CHECK(static_cast<int>(seen.size()) == count);
}
