#include "detrl/evalproto.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "detrl/digest.hpp"
#include "detrl/dqn.hpp"
#include "detrl/version.hpp"

namespace detrl {

namespace {

using nlohmann::json;

float max_q(const QNetwork& net, const CatchState& state) {
  const std::vector<float> q = forward<float>(net, featurize(state));
  return *std::max_element(q.begin(), q.end());
}

int greedy_action(const QNetwork& net, const CatchState& state) {
  const std::vector<float> q = forward<float>(net, featurize(state));
  return argmax_action<float>(std::span<const float>(q));
}

}  // namespace

std::vector<StartSequence> generate_start_sequences(
    const QNetwork& ranker_net, const EnvConfig& env_cfg,
    RandomStream& gen_stream, const SuiteGenParams& params) {
  if (params.len_min < 1 || params.len_max < params.len_min)
    throw std::invalid_argument("invalid length range");
  if (params.len_max >= env_cfg.grid_h - 1)
    throw std::invalid_argument(
        "len_max must be < grid_h - 1 so start sequences stay reward-free");
  if (params.n_select > params.top_k || params.top_k > params.n_candidates)
    throw std::invalid_argument("need n_select <= top_k <= n_candidates");

  struct Candidate {
    StartSequence seq;
    float max_q;
  };

  CatchEnv env(env_cfg);
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(params.n_candidates));
  std::unordered_set<std::uint64_t> seen_end_states;
  std::uint64_t episode_counter = 0;

  for (int produced = 0; produced < params.n_candidates; ++produced) {
    // Reroll (with a fresh episode index) until the sequence stays alive.
    for (;;) {
      const std::uint64_t episode = episode_counter++;
      const int len = params.len_min +
                      static_cast<int>(gen_stream.next_int(
                          static_cast<std::uint64_t>(params.len_max - params.len_min + 1)));
      StartSequence seq;
      seq.env_episode = episode;
      seq.actions.reserve(static_cast<std::size_t>(len));
      env.reset(episode);
      bool dead = false;
      for (int i = 0; i < len; ++i) {
        const int a = static_cast<int>(gen_stream.next_int(kNumActions));
        seq.actions.push_back(a);
        if (env.step(static_cast<Action>(a)).terminal) {
          dead = true;
          break;
        }
      }
      if (dead) continue;
      const std::uint64_t digest = state_digest(env.state());
      seq.end_state_digest = to_hex16(digest);
      if (seen_end_states.insert(digest).second)
        candidates.push_back({std::move(seq), max_q(ranker_net, env.state())});
      break;  // duplicates still count toward n_candidates
    }
  }

  if (static_cast<int>(candidates.size()) < params.top_k)
    throw SuiteGenError("only " + std::to_string(candidates.size()) +
                        " unique viable candidates out of " +
                        std::to_string(params.n_candidates) + "; need top_k=" +
                        std::to_string(params.top_k));

  // Rank by max-Q descending; stable so candidate order breaks ties.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.max_q > b.max_q;
                   });
  candidates.resize(static_cast<std::size_t>(params.top_k));

  // Uniform sample without replacement, in draw order.
  std::vector<StartSequence> selected;
  selected.reserve(static_cast<std::size_t>(params.n_select));
  std::vector<std::size_t> pool(candidates.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  for (int k = 0; k < params.n_select; ++k) {
    const std::uint64_t j = gen_stream.next_int(pool.size());
    selected.push_back(std::move(candidates[pool[j]].seq));
    pool[j] = pool.back();
    pool.pop_back();
  }
  return selected;
}

EvalSuite make_start_state_suite(const QNetwork& ranker_net,
                                 const EnvConfig& env_cfg,
                                 RandomStream& gen_stream,
                                 const SuiteGenParams& params,
                                 long episode_cap) {
  EvalSuite suite;
  suite.kind = SuiteKind::kStartStates;
  suite.episode_cap = episode_cap;
  suite.start_sequences =
      generate_start_sequences(ranker_net, env_cfg, gen_stream, params);
  suite.provenance = {
      {"seed", gen_stream.seed()},
      {"ranker_hash", to_hex16(weight_hash(ranker_net))},
      {"params",
       {{"n_candidates", params.n_candidates},
        {"top_k", params.top_k},
        {"n_select", params.n_select},
        {"len_min", params.len_min},
        {"len_max", params.len_max}}}};
  return suite;
}

EvalSuite make_sticky_suite(RandomStream& gen_stream, int n_seeds,
                            long episode_cap) {
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
  EvalSuite suite;
  suite.kind = SuiteKind::kStickySeeds;
  suite.episode_cap = episode_cap;
  std::unordered_set<std::uint64_t> seen;
  while (static_cast<int>(suite.sticky_seeds.size()) < n_seeds) {
    const std::uint64_t s = gen_stream.next_u64();
    if (seen.insert(s).second) suite.sticky_seeds.push_back(s);
  }
  suite.provenance = {{"seed", gen_stream.seed()},
                      {"params", {{"n_seeds", n_seeds}}}};
  return suite;
}

namespace {

double run_start_state_episode(const QNetwork& net, const StartSequence& seq,
                               const EnvConfig& env_cfg, long episode_cap,
                               EpisodeTrace* trace) {
  CatchEnv env(env_cfg);
  env.reset(seq.env_episode);
  double score = 0.0;
  long steps = 0;
  auto record = [&](int action) {
    if (!trace) return;
    trace->actions.push_back(action);
    trace->state_digests.push_back(state_digest(env.state()));
  };
  for (int a : seq.actions) {
    const StepResult r = env.step(static_cast<Action>(a));
    score += r.reward;
    ++steps;
    record(a);
    if (r.terminal)
      throw std::logic_error("start sequence terminated the episode");
  }
  while (!env.state().terminal && steps < episode_cap) {
    const int a = greedy_action(net, env.state());
    const StepResult r = env.step(static_cast<Action>(a));
    score += r.reward;
    ++steps;
    record(a);
    if (r.terminal) break;
  }
  return score;
}

double run_sticky_episode(const QNetwork& net, std::uint64_t sticky_seed,
                          const EnvConfig& env_cfg, long episode_cap) {
  CatchEnv env(env_cfg);
  env.reset(0);
  RandomStream sticky("sticky-eval", sticky_seed);
  StickyWrapper wrapper(env, env_cfg.sticky_p, sticky);
  wrapper.begin_episode();
  double score = 0.0;
  long steps = 0;
  while (!env.state().terminal && steps < episode_cap) {
    const int a = greedy_action(net, env.state());
    const StepResult r = wrapper.step(static_cast<Action>(a));
    score += r.reward;
    ++steps;
    if (r.terminal) break;
  }
  return score;
}

}  // namespace

EvalResult evaluate(const QNetwork& net, const EvalSuite& suite,
                    const EnvConfig& env_cfg) {
  const bool sticky_env = env_cfg.sticky_p > 0.0;
  if (suite.kind == SuiteKind::kStartStates && sticky_env)
    throw std::invalid_argument(
        "start-state suite requires a deterministic environment (sticky_p=0)");
  if (suite.kind == SuiteKind::kStickySeeds && !sticky_env)
    throw std::invalid_argument(
        "sticky-seed suite requires a stochastic environment (sticky_p>0)");
  if (suite.size() == 0) throw std::invalid_argument("empty evaluation suite");

  EvalResult result;
  result.per_episode_scores.reserve(suite.size());
  if (suite.kind == SuiteKind::kStartStates) {
    for (const StartSequence& seq : suite.start_sequences)
      result.per_episode_scores.push_back(run_start_state_episode(
          net, seq, env_cfg, suite.episode_cap, nullptr));
  } else {
    for (const std::uint64_t seed : suite.sticky_seeds)
      result.per_episode_scores.push_back(
          run_sticky_episode(net, seed, env_cfg, suite.episode_cap));
  }

  double sum = 0.0;
  for (double s : result.per_episode_scores) sum += s;
  result.mean = sum / static_cast<double>(result.per_episode_scores.size());
  double sq = 0.0;
  for (double s : result.per_episode_scores) {
    const double d = s - result.mean;
    sq += d * d;
  }
  const std::size_t n = result.per_episode_scores.size();
  result.stddev =
      n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
  return result;
}

EpisodeTrace rollout_traced(const QNetwork& net, const StartSequence& seq,
                            const EnvConfig& env_cfg, long episode_cap) {
  EpisodeTrace trace;
  trace.score =
      run_start_state_episode(net, seq, env_cfg, episode_cap, &trace);
  return trace;
}

std::vector<std::vector<std::pair<long, double>>> per_start_state_curve(
    const RunLog& log) {
  std::vector<std::vector<std::pair<long, double>>> series;
  if (log.evaluations.empty()) return series;
  const std::size_t n = log.evaluations.front().scores.size();
  series.resize(n);
  for (const EvaluationRecord& rec : log.evaluations) {
    if (rec.scores.size() != n)
      throw std::invalid_argument("evaluation records have unequal sizes");
    for (std::size_t i = 0; i < n; ++i)
      series[i].emplace_back(rec.step, rec.scores[i]);
  }
  return series;
}

nlohmann::json suite_to_json(const EvalSuite& suite) {
  json entries = json::array();
  if (suite.kind == SuiteKind::kStartStates) {
    for (const StartSequence& seq : suite.start_sequences)
      entries.push_back({{"actions", seq.actions},
                         {"env_episode", seq.env_episode},
                         {"end_state_digest", seq.end_state_digest}});
  } else {
    for (std::uint64_t s : suite.sticky_seeds) entries.push_back(s);
  }
  return json{{"schema_version", kSuiteSchemaVersion},
              {"kind", suite.kind == SuiteKind::kStartStates ? "start_states"
                                                             : "sticky_seeds"},
              {"episode_cap", suite.episode_cap},
              {"entries", entries},
              {"generator_provenance", suite.provenance}};
}

EvalSuite suite_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kSuiteSchemaVersion)
    throw std::runtime_error("unsupported suite schema version");
  EvalSuite suite;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "start_states") {
    suite.kind = SuiteKind::kStartStates;
    for (const auto& e : j.at("entries")) {
      StartSequence seq;
      seq.actions = e.at("actions").get<std::vector<int>>();
      seq.env_episode = e.at("env_episode").get<std::uint64_t>();
      seq.end_state_digest = e.at("end_state_digest").get<std::string>();
      suite.start_sequences.push_back(std::move(seq));
    }
  } else if (kind == "sticky_seeds") {
    suite.kind = SuiteKind::kStickySeeds;
    suite.sticky_seeds =
        j.at("entries").get<std::vector<std::uint64_t>>();
  } else {
    throw std::runtime_error("unknown suite kind: " + kind);
  }
  suite.episode_cap = j.at("episode_cap").get<long>();
  if (j.contains("generator_provenance"))
    suite.provenance = j.at("generator_provenance");
  return suite;
}

void save_suite(const EvalSuite& suite, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << suite_to_json(suite).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EvalSuite load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  return suite_from_json(j);
}

}  // namespace detrl
