#include <doctest.h>

#include <set>

#include "detrl/sensitivity.hpp"

using namespace detrl;

namespace {

Hyperparams tiny_hp() {
  Hyperparams hp;
  hp.hidden_sizes = {8};
  hp.total_steps = 600;
  hp.eval_interval = 200;
  hp.eps_anneal_steps = 300;
  hp.target_sync_interval = 100;
  hp.learn_start = 64;
  hp.batch_size = 8;
  return hp;
}

SeedSpec base_seeds() {
  SeedSpec s;
  s.init_seed = 100;
  s.exploration_seed = 200;
  s.noop_seed = 300;
  s.minibatch_seed = 400;
  s.sticky_seed = 500;
  s.compute_seed = 600;
  s.env_instance_seed = 700;
  return s;
}

EvalSuite tiny_start_suite(const EnvConfig& env_cfg) {
  RandomStream init = new_stream("ranker", 1);
  const QNetwork ranker =
      init_network({feature_length(env_cfg), 8, kNumActions}, init);
  RandomStream gen = new_stream("suite", 2);
  SuiteGenParams params;
  params.n_candidates = 80;
  params.top_k = 40;
  params.n_select = 8;
  return make_start_state_suite(ranker, env_cfg, gen, params, 200);
}

}  // namespace

TEST_CASE("group names round-trip") {
  for (GroupKind kind : all_group_kinds())
    CHECK(group_kind_from_name(group_name(kind)) == kind);
  CHECK_THROWS_AS(group_kind_from_name("gpu"), std::invalid_argument);
}

TEST_CASE("deterministic group: five identical configs") {
  const GroupSpec spec = make_group_spec(
      GroupKind::kDeterministic, base_seeds(), tiny_hp(), EnvConfig{});
  const auto configs = build_group_configs(spec);
  REQUIRE(configs.size() == 5);
  for (const auto& cfg : configs) {
    CHECK(cfg == configs.front());
    CHECK(cfg.compute_kind == ComputeKind::kDeterministic);
    CHECK(cfg.env.sticky_p == 0.0);
  }
}

TEST_CASE("initialization group varies only init_seed") {
  const GroupSpec spec = make_group_spec(
      GroupKind::kInitialization, base_seeds(), tiny_hp(), EnvConfig{});
  const auto configs = build_group_configs(spec);
  std::set<std::uint64_t> inits;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    inits.insert(configs[i].seeds.init_seed);
    CHECK(configs[i].seeds.init_seed ==
          base_seeds().init_seed + static_cast<std::uint64_t>(i));
    AgentRunConfig normalized = configs[i];
    normalized.seeds.init_seed = base_seeds().init_seed;
    CHECK(normalized == configs.front());
  }
  CHECK(inits.size() == configs.size());
}

TEST_CASE("environment group: sticky 0.25, distinct seeds, eps_end 0.01") {
  const GroupSpec spec = make_group_spec(
      GroupKind::kEnvironment, base_seeds(), tiny_hp(), EnvConfig{});
  CHECK(spec.env.sticky_p == 0.25);
  CHECK(spec.hp.eps_end == 0.01);
  const auto configs = build_group_configs(spec);
  std::set<std::uint64_t> seeds;
  for (const auto& cfg : configs) {
    CHECK(cfg.env.sticky_p == 0.25);
    seeds.insert(cfg.seeds.sticky_seed);
  }
  CHECK(seeds.size() == 5);
}

TEST_CASE("compute group turns on perturbed reductions") {
  const GroupSpec spec = make_group_spec(
      GroupKind::kCompute, base_seeds(), tiny_hp(), EnvConfig{});
  const auto configs = build_group_configs(spec);
  std::set<std::uint64_t> seeds;
  for (const auto& cfg : configs) {
    CHECK(cfg.compute_kind == ComputeKind::kPerturbedReduction);
    seeds.insert(cfg.seeds.compute_seed);
  }
  CHECK(seeds.size() == 5);
}

TEST_CASE("inconsistent group specs are rejected") {
  GroupSpec spec = make_group_spec(GroupKind::kEnvironment, base_seeds(),
                                   tiny_hp(), EnvConfig{});
  spec.env.sticky_p = 0.0;  // environment group without stochasticity
  CHECK_THROWS_AS(build_group_configs(spec), std::invalid_argument);

  GroupSpec spec2 = make_group_spec(GroupKind::kExploration, base_seeds(),
                                    tiny_hp(), EnvConfig{});
  spec2.env.sticky_p = 0.25;
  CHECK_THROWS_AS(build_group_configs(spec2), std::invalid_argument);

  GroupSpec spec3 = make_group_spec(GroupKind::kDeterministic, base_seeds(),
                                    tiny_hp(), EnvConfig{});
  spec3.n_runs = 0;
  CHECK_THROWS_AS(build_group_configs(spec3), std::invalid_argument);
}

TEST_CASE("deterministic group report has exactly zero std everywhere") {
  const EnvConfig env_cfg;
  const EvalSuite suite = tiny_start_suite(env_cfg);
  const GroupSpec spec = make_group_spec(GroupKind::kDeterministic,
                                         base_seeds(), tiny_hp(), env_cfg);
  const GroupResult result = run_group(spec, &suite, nullptr);
  REQUIRE(result.logs.size() == 5);
  for (const IntervalStats& s : result.report.per_interval) {
    CHECK(s.stddev == 0.0);  // bitwise, not a tolerance
    if (s.rel_std_defined) CHECK(s.rel_std == 0.0);
  }
  // All five logs byte-identical.
  for (const RunLog& log : result.logs)
    CHECK(compare_runs(log, result.logs.front()).identical);
}

TEST_CASE("exploration group: shared init hash, diverging runs, best >= final") {
  const EnvConfig env_cfg;
  const EvalSuite suite = tiny_start_suite(env_cfg);
  GroupSpec spec = make_group_spec(GroupKind::kExploration, base_seeds(),
                                   tiny_hp(), env_cfg);
  const GroupResult result = run_group(spec, &suite, nullptr);
  const auto step0_hash = result.logs.front().checkpoints.front().weight_hash;
  for (const RunLog& log : result.logs)
    CHECK(log.checkpoints.front().weight_hash == step0_hash);
  CHECK(result.report.best_stats.mean >= result.report.final_stats.mean);
  CHECK(result.report.per_run_best.size() == 5);
  for (const RunBest& b : result.report.per_run_best)
    CHECK(b.best_score >=
          result.logs[static_cast<std::size_t>(b.run)].evaluations.back().mean);
}

TEST_CASE("report is a pure function of the logs") {
  const EnvConfig env_cfg;
  const EvalSuite suite = tiny_start_suite(env_cfg);
  const GroupSpec spec = make_group_spec(GroupKind::kMinibatch, base_seeds(),
                                         tiny_hp(), env_cfg);
  const GroupResult result = run_group(spec, &suite, nullptr, 2);
  const GroupReport recomputed =
      compute_group_report(spec.kind, result.logs);
  CHECK(group_report_to_json(recomputed).dump() ==
        group_report_to_json(result.report).dump());
}

TEST_CASE("parallel and serial group execution agree") {
  const EnvConfig env_cfg;
  GroupSpec spec = make_group_spec(GroupKind::kInitialization, base_seeds(),
                                   tiny_hp(), env_cfg);
  spec.n_runs = 3;
  const GroupResult serial = run_group(spec, nullptr, nullptr, 1);
  const GroupResult parallel = run_group(spec, nullptr, nullptr, 3);
  REQUIRE(serial.logs.size() == parallel.logs.size());
  for (std::size_t i = 0; i < serial.logs.size(); ++i)
    CHECK(runlog_to_json(serial.logs[i]).dump() ==
          runlog_to_json(parallel.logs[i]).dump());
}

TEST_CASE("group report JSON flags undefined rel_std") {
  RunLog log;
  log.evaluations.push_back(EvaluationRecord{0, {0.0, 0.0}, 0.0});
  const GroupReport report =
      compute_group_report(GroupKind::kDeterministic, {log, log});
  CHECK_FALSE(report.per_interval.front().rel_std_defined);
  const auto j = group_report_to_json(report);
  CHECK(j["per_interval"][0]["rel_std"].is_null());
}
