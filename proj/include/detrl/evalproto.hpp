#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detrl/env.hpp"
#include "detrl/network.hpp"
#include "detrl/rng.hpp"
#include "detrl/runlog.hpp"

namespace detrl {

// A predetermined action prefix placing the agent in a fixed state from
// which greedy evaluation begins. env_episode pins the environment content
// the sequence was rolled in (Catch's board is tiny; diversity needs both
// varied actions and varied episode content to yield enough unique states).
struct StartSequence {
  std::vector<int> actions;
  std::uint64_t env_episode = 0;
  std::string end_state_digest;  // 16 hex digits
};

enum class SuiteKind { kStartStates, kStickySeeds };

// Fixed across all evaluation intervals of a group. StartStates drives the
// deterministic-environment protocol; StickySeeds gives each episode its
// own sticky action seed for stochastic-environment agents.
struct EvalSuite {
  SuiteKind kind = SuiteKind::kStartStates;
  std::vector<StartSequence> start_sequences;
  std::vector<std::uint64_t> sticky_seeds;
  long episode_cap = 200;  // steps; replaces the wall-clock cap
  nlohmann::json provenance;

  std::size_t size() const {
    return kind == SuiteKind::kStartStates ? start_sequences.size()
                                           : sticky_seeds.size();
  }
};

struct SuiteGenParams {
  int n_candidates = 1000;
  int top_k = 250;
  int n_select = 100;
  int len_min = 2;
  int len_max = 6;
};

class SuiteGenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rolls n_candidates random action sequences (length uniform in
// [len_min, len_max], candidate i in environment episode i; sequences that
// terminate mid-rollout are rerolled), drops duplicate end states, ranks by
// max-Q under the ranker, then samples n_select uniformly without
// replacement from the top_k. Errors if fewer than top_k unique viable
// candidates exist.
std::vector<StartSequence> generate_start_sequences(
    const QNetwork& ranker_net, const EnvConfig& env_cfg,
    RandomStream& gen_stream, const SuiteGenParams& params);

EvalSuite make_start_state_suite(const QNetwork& ranker_net,
                                 const EnvConfig& env_cfg,
                                 RandomStream& gen_stream,
                                 const SuiteGenParams& params,
                                 long episode_cap);

EvalSuite make_sticky_suite(RandomStream& gen_stream, int n_seeds,
                            long episode_cap);

struct EvalResult {
  std::vector<double> per_episode_scores;
  double mean = 0.0;
  double stddev = 0.0;
};

// Greedy evaluation over the whole suite, always with deterministic forward
// passes. StartStates episodes replay the stored action prefix first and
// the score includes rewards accrued during it; StickySeeds episodes run
// under a sticky wrapper with a per-episode stream seeded from the suite.
EvalResult evaluate(const QNetwork& net, const EvalSuite& suite,
                    const EnvConfig& env_cfg);

// Full action/state trace of one StartStates episode; lets tests assert
// that two networks' trajectories agree exactly until their first argmax
// disagreement.
struct EpisodeTrace {
  std::vector<int> actions;               // executed, start prefix included
  std::vector<std::uint64_t> state_digests;
  double score = 0.0;
};

EpisodeTrace rollout_traced(const QNetwork& net, const StartSequence& seq,
                            const EnvConfig& env_cfg, long episode_cap);

// Transposes a run's evaluation records into one (step, score) series per
// suite entry.
std::vector<std::vector<std::pair<long, double>>> per_start_state_curve(
    const RunLog& log);

nlohmann::json suite_to_json(const EvalSuite& suite);
EvalSuite suite_from_json(const nlohmann::json& j);
void save_suite(const EvalSuite& suite, const std::filesystem::path& path);
EvalSuite load_suite(const std::filesystem::path& path);

}  // namespace detrl
