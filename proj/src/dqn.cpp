#include "detrl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "detrl/digest.hpp"
#include "detrl/evalproto.hpp"
#include "detrl/version.hpp"

namespace detrl {

using nlohmann::json;

std::vector<float> featurize(const CatchState& s) {
  std::vector<float> f(
      static_cast<std::size_t>(s.grid_w * s.grid_h + s.grid_w), 0.0f);
  f[static_cast<std::size_t>(s.ball_row * s.grid_w + s.ball_col)] = 1.0f;
  f[static_cast<std::size_t>(s.grid_w * s.grid_h + s.paddle_col)] = 1.0f;
  return f;
}

int feature_length(const EnvConfig& cfg) {
  return cfg.grid_w * cfg.grid_h + cfg.grid_w;
}

double epsilon_at(long t, const Hyperparams& hp) {
  if (t < 0) throw std::invalid_argument("epsilon_at: t must be >= 0");
  const double progress = std::min(
      static_cast<double>(t) / static_cast<double>(hp.eps_anneal_steps), 1.0);
  return hp.eps_start + (hp.eps_end - hp.eps_start) * progress;
}

ActionChoice select_action_ex(const QNetwork& net,
                              std::span<const float> features, double eps,
                              RandomStream& exploration_stream,
                              const ComputeMode& mode) {
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("eps must be in [0,1]");
  const double u = exploration_stream.next_uniform();
  if (u < eps)
    return {static_cast<int>(exploration_stream.next_int(kNumActions)), true};
  const std::vector<float> q = forward<float>(net, features, mode);
  return {argmax_action<float>(std::span<const float>(q)), false};
}

int select_action(const QNetwork& net, std::span<const float> features,
                  double eps, RandomStream& exploration_stream,
                  const ComputeMode& mode) {
  return select_action_ex(net, features, eps, exploration_stream, mode).action;
}

std::vector<float> td_targets(const QNetwork& target_net,
                              std::span<const Transition* const> minibatch,
                              double gamma, const ComputeMode& mode) {
  if (minibatch.empty()) throw std::invalid_argument("empty minibatch");
  std::vector<float> targets;
  targets.reserve(minibatch.size());
  for (const Transition* tr : minibatch) {
    float y = tr->reward;
    if (!tr->terminal) {
      const std::vector<float> q = forward<float>(
          target_net, std::span<const float>(tr->next_state), mode);
      y += static_cast<float>(gamma) *
           *std::max_element(q.begin(), q.end());
    }
    targets.push_back(y);
  }
  return targets;
}

namespace {

void validate(const AgentRunConfig& cfg) {
  const Hyperparams& hp = cfg.hp;
  if (hp.eps_end > hp.eps_start)
    throw std::invalid_argument("eps_end must be <= eps_start");
  if (hp.eps_anneal_steps < 1 || hp.target_sync_interval < 1 ||
      hp.train_every < 1 || hp.eval_interval < 1)
    throw std::invalid_argument("intervals must be >= 1");
  if (hp.batch_size < 1 || hp.replay_capacity < hp.batch_size)
    throw std::invalid_argument("replay capacity must hold a minibatch");
  if (hp.total_steps < 0)
    throw std::invalid_argument("total_steps must be >= 0");
  if (hp.gamma < 0.0 || hp.gamma > 1.0)
    throw std::invalid_argument("gamma must be in [0,1]");
}

}  // namespace

RunLog train_run(const AgentRunConfig& cfg, const EvalSuite* suite,
                 TrainTrace* trace, QNetwork* final_net_out) {
  validate(cfg);
  const Hyperparams& hp = cfg.hp;

  RandomStream init_stream("init", cfg.seeds.init_seed);
  RandomStream exploration("exploration", cfg.seeds.exploration_seed);
  RandomStream noop("noop", cfg.seeds.noop_seed);
  RandomStream minibatch("minibatch", cfg.seeds.minibatch_seed);
  RandomStream sticky("sticky", cfg.seeds.sticky_seed);
  RandomStream compute("compute", cfg.seeds.compute_seed);

  const ComputeMode mode = cfg.compute_kind == ComputeKind::kPerturbedReduction
                               ? ComputeMode::perturbed(compute)
                               : ComputeMode::deterministic();

  std::vector<int> layer_sizes;
  layer_sizes.push_back(feature_length(cfg.env));
  for (int h : hp.hidden_sizes) layer_sizes.push_back(h);
  layer_sizes.push_back(kNumActions);

  QNetwork net = init_network(layer_sizes, init_stream);
  QNetwork target_net = net;
  OptimizerState opt =
      make_optimizer(net, hp.learning_rate, hp.rms_decay, hp.rms_epsilon);
  ReplayBuffer buffer(static_cast<std::size_t>(hp.replay_capacity));
  CatchEnv env(cfg.env);
  std::optional<StickyWrapper> wrapper;
  if (cfg.env.sticky_p > 0.0)
    wrapper.emplace(env, cfg.env.sticky_p, sticky);

  RunLog log;
  log.version = kVersion;
  log.config_fingerprint = config_fingerprint(cfg);

  const auto snapshot_draw_counts = [&] {
    return std::map<std::string, std::uint64_t>{
        {"init", init_stream.draw_count()},
        {"exploration", exploration.draw_count()},
        {"noop", noop.draw_count()},
        {"minibatch", minibatch.draw_count()},
        {"sticky", sticky.draw_count()},
        {"compute", compute.draw_count()}};
  };
  const auto checkpoint_at = [&](long step) {
    log.checkpoints.push_back(
        Checkpoint{step, weight_hash(net), snapshot_draw_counts()});
    if (suite) {
      const EvalResult r = evaluate(net, *suite, cfg.env);
      log.evaluations.push_back(
          EvaluationRecord{step, r.per_episode_scores, r.mean});
    }
  };

  checkpoint_at(0);

  std::uint64_t episode_index = 0;
  bool need_reset = true;
  std::vector<TargetItem<float>> batch_items(
      static_cast<std::size_t>(hp.batch_size));

  for (long t = 0; t < hp.total_steps; ++t) {
    if (need_reset) {
      noop_start(env, episode_index, cfg.env.max_noops, noop);
      ++episode_index;
      if (wrapper) wrapper->begin_episode();
      need_reset = false;
    }

    std::vector<float> features = featurize(env.state());
    const double eps = epsilon_at(t, hp);
    const ActionChoice choice = select_action_ex(
        net, std::span<const float>(features), eps, exploration, mode);
    const int action = choice.action;
    if (trace) {
      trace->chosen_actions.push_back(action);
      trace->explored.push_back(choice.explored ? 1 : 0);
    }

    const StepResult sr = wrapper ? wrapper->step(static_cast<Action>(action))
                                  : env.step(static_cast<Action>(action));
    Transition tr;
    tr.state = std::move(features);
    tr.action = action;
    tr.reward = static_cast<float>(sr.reward);
    tr.next_state = featurize(env.state());
    tr.terminal = sr.terminal;
    buffer.push(std::move(tr));
    if (sr.terminal) need_reset = true;

    const long done = t + 1;

    if (done % hp.train_every == 0 &&
        buffer.size() >= static_cast<std::size_t>(hp.learn_start) &&
        buffer.size() >= static_cast<std::size_t>(hp.batch_size)) {
      std::vector<std::uint64_t> indices;
      const auto batch =
          buffer.sample(static_cast<std::size_t>(hp.batch_size), minibatch,
                        trace ? &indices : nullptr);
      if (trace) trace->minibatch_indices.push_back(std::move(indices));
      const std::vector<float> targets =
          td_targets(target_net, std::span<const Transition* const>(batch),
                     hp.gamma, mode);
      for (std::size_t i = 0; i < batch.size(); ++i)
        batch_items[i] = TargetItem<float>{batch[i]->state.data(),
                                           batch[i]->action, targets[i]};
      try {
        const BackwardResult<float> back = backward<float>(
            net, std::span<const TargetItem<float>>(batch_items), mode);
        if (!std::isfinite(back.loss))
          throw DivergenceError("non-finite loss");
        apply_update(net, back.grads, opt);
      } catch (const DivergenceError& e) {
        log.outcome = RunOutcome::kDiverged;
        log.divergence_step = done;
        log.divergence_message = e.what();
        break;
      }
    }

    if (done % hp.target_sync_interval == 0) target_net = net;
    if (done % hp.eval_interval == 0) checkpoint_at(done);
  }

  if (final_net_out) *final_net_out = net;
  return log;
}

json seeds_to_json(const SeedSpec& s) {
  return json{{"init_seed", s.init_seed},
              {"exploration_seed", s.exploration_seed},
              {"noop_seed", s.noop_seed},
              {"minibatch_seed", s.minibatch_seed},
              {"sticky_seed", s.sticky_seed},
              {"compute_seed", s.compute_seed},
              {"env_instance_seed", s.env_instance_seed}};
}

SeedSpec seeds_from_json(const json& j) {
  SeedSpec s;
  s.init_seed = j.value("init_seed", 0ull);
  s.exploration_seed = j.value("exploration_seed", 0ull);
  s.noop_seed = j.value("noop_seed", 0ull);
  s.minibatch_seed = j.value("minibatch_seed", 0ull);
  s.sticky_seed = j.value("sticky_seed", 0ull);
  s.compute_seed = j.value("compute_seed", 0ull);
  s.env_instance_seed = j.value("env_instance_seed", 0ull);
  return s;
}

json hyperparams_to_json(const Hyperparams& hp) {
  return json{{"gamma", hp.gamma},
              {"eps_start", hp.eps_start},
              {"eps_end", hp.eps_end},
              {"eps_anneal_steps", hp.eps_anneal_steps},
              {"target_sync_interval", hp.target_sync_interval},
              {"batch_size", hp.batch_size},
              {"train_every", hp.train_every},
              {"total_steps", hp.total_steps},
              {"eval_interval", hp.eval_interval},
              {"learn_start", hp.learn_start},
              {"replay_capacity", hp.replay_capacity},
              {"hidden_sizes", hp.hidden_sizes},
              {"learning_rate", hp.learning_rate},
              {"rms_decay", hp.rms_decay},
              {"rms_epsilon", hp.rms_epsilon}};
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams hp;
  hp.gamma = j.value("gamma", hp.gamma);
  hp.eps_start = j.value("eps_start", hp.eps_start);
  hp.eps_end = j.value("eps_end", hp.eps_end);
  hp.eps_anneal_steps = j.value("eps_anneal_steps", hp.eps_anneal_steps);
  hp.target_sync_interval =
      j.value("target_sync_interval", hp.target_sync_interval);
  hp.batch_size = j.value("batch_size", hp.batch_size);
  hp.train_every = j.value("train_every", hp.train_every);
  hp.total_steps = j.value("total_steps", hp.total_steps);
  hp.eval_interval = j.value("eval_interval", hp.eval_interval);
  hp.learn_start = j.value("learn_start", hp.learn_start);
  hp.replay_capacity = j.value("replay_capacity", hp.replay_capacity);
  hp.hidden_sizes = j.value("hidden_sizes", hp.hidden_sizes);
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.rms_decay = j.value("rms_decay", hp.rms_decay);
  hp.rms_epsilon = j.value("rms_epsilon", hp.rms_epsilon);
  return hp;
}

json env_config_to_json(const EnvConfig& cfg) {
  return json{{"grid_w", cfg.grid_w},
              {"grid_h", cfg.grid_h},
              {"sticky_p", cfg.sticky_p},
              {"max_noops", cfg.max_noops},
              {"episode_len", cfg.episode_len},
              {"env_instance_seed", cfg.env_instance_seed}};
}

EnvConfig env_config_from_json(const json& j) {
  EnvConfig cfg;
  cfg.grid_w = j.value("grid_w", cfg.grid_w);
  cfg.grid_h = j.value("grid_h", cfg.grid_h);
  cfg.sticky_p = j.value("sticky_p", cfg.sticky_p);
  cfg.max_noops = j.value("max_noops", cfg.max_noops);
  cfg.episode_len = j.value("episode_len", cfg.episode_len);
  cfg.env_instance_seed = j.value("env_instance_seed", cfg.env_instance_seed);
  return cfg;
}

json run_config_to_json(const AgentRunConfig& cfg) {
  return json{{"seeds", seeds_to_json(cfg.seeds)},
              {"hp", hyperparams_to_json(cfg.hp)},
              {"env", env_config_to_json(cfg.env)},
              {"compute",
               cfg.compute_kind == ComputeKind::kDeterministic
                   ? "deterministic"
                   : "perturbed_reduction"}};
}

AgentRunConfig run_config_from_json(const json& j) {
  AgentRunConfig cfg;
  cfg.seeds = seeds_from_json(j.at("seeds"));
  cfg.hp = hyperparams_from_json(j.at("hp"));
  cfg.env = env_config_from_json(j.at("env"));
  const std::string compute = j.value("compute", "deterministic");
  if (compute == "deterministic") {
    cfg.compute_kind = ComputeKind::kDeterministic;
  } else if (compute == "perturbed_reduction") {
    cfg.compute_kind = ComputeKind::kPerturbedReduction;
  } else {
    throw std::runtime_error("unknown compute kind: " + compute);
  }
  return cfg;
}

std::string config_fingerprint(const AgentRunConfig& cfg) {
  Fnv1a64 h;
  h.update_string(run_config_to_json(cfg).dump());
  return to_hex16(h.digest());
}

}  // namespace detrl
