#include "detrl/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "detrl/stats.hpp"

namespace detrl {

const char* group_name(GroupKind kind) {
  switch (kind) {
    case GroupKind::kDeterministic: return "deterministic";
    case GroupKind::kCompute: return "compute";
    case GroupKind::kEnvironment: return "environment";
    case GroupKind::kExploration: return "exploration";
    case GroupKind::kInitialization: return "initialization";
    case GroupKind::kMinibatch: return "minibatch";
  }
  return "unknown";
}

GroupKind group_kind_from_name(const std::string& name) {
  for (GroupKind kind : all_group_kinds())
    if (name == group_name(kind)) return kind;
  throw std::invalid_argument("unknown group name: " + name);
}

std::vector<GroupKind> all_group_kinds() {
  return {GroupKind::kDeterministic,  GroupKind::kCompute,
          GroupKind::kEnvironment,    GroupKind::kExploration,
          GroupKind::kInitialization, GroupKind::kMinibatch};
}

GroupSpec make_group_spec(GroupKind kind, const SeedSpec& base_seeds,
                          const Hyperparams& base_hp, const EnvConfig& base_env,
                          int n_runs) {
  GroupSpec spec;
  spec.kind = kind;
  spec.base_seeds = base_seeds;
  spec.n_runs = n_runs;
  spec.hp = base_hp;
  spec.env = base_env;
  if (kind == GroupKind::kEnvironment) {
    spec.env.sticky_p = 0.25;
    spec.hp.eps_end = 0.01;
  } else {
    spec.env.sticky_p = 0.0;
  }
  return spec;
}

std::vector<AgentRunConfig> build_group_configs(const GroupSpec& spec) {
  if (spec.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  if (spec.kind == GroupKind::kEnvironment) {
    if (spec.env.sticky_p != 0.25)
      throw std::invalid_argument(
          "environment group requires sticky_p = 0.25");
  } else if (spec.env.sticky_p != 0.0) {
    throw std::invalid_argument(
        std::string(group_name(spec.kind)) +
        " group requires a deterministic environment (sticky_p = 0)");
  }

  std::vector<AgentRunConfig> configs;
  configs.reserve(static_cast<std::size_t>(spec.n_runs));
  for (int run = 0; run < spec.n_runs; ++run) {
    AgentRunConfig cfg;
    cfg.seeds = spec.base_seeds;
    cfg.hp = spec.hp;
    cfg.env = spec.env;
    cfg.compute_kind = ComputeKind::kDeterministic;
    const auto offset = static_cast<std::uint64_t>(run);
    switch (spec.kind) {
      case GroupKind::kDeterministic:
        break;
      case GroupKind::kCompute:
        cfg.compute_kind = ComputeKind::kPerturbedReduction;
        cfg.seeds.compute_seed = spec.base_seeds.compute_seed + offset;
        break;
      case GroupKind::kEnvironment:
        cfg.seeds.sticky_seed = spec.base_seeds.sticky_seed + offset;
        break;
      case GroupKind::kExploration:
        cfg.seeds.exploration_seed = spec.base_seeds.exploration_seed + offset;
        break;
      case GroupKind::kInitialization:
        cfg.seeds.init_seed = spec.base_seeds.init_seed + offset;
        break;
      case GroupKind::kMinibatch:
        cfg.seeds.minibatch_seed = spec.base_seeds.minibatch_seed + offset;
        break;
    }
    configs.push_back(std::move(cfg));
  }
  return configs;
}

namespace {

IntervalStats make_interval_stats(long step, std::span<const double> values) {
  IntervalStats stats;
  stats.step = step;
  stats.mean = mean(values);
  stats.stddev = values.size() > 1 ? sample_stddev(values) : 0.0;
  stats.rel_std = rel_std_or_nan(stats.mean, stats.stddev);
  stats.rel_std_defined = !std::isnan(stats.rel_std);
  return stats;
}

}  // namespace

GroupReport compute_group_report(GroupKind kind,
                                 const std::vector<RunLog>& logs) {
  GroupReport report;
  report.kind = kind;
  std::vector<const RunLog*> completed;
  for (const RunLog& log : logs) {
    if (log.outcome == RunOutcome::kCompleted)
      completed.push_back(&log);
    else
      ++report.diverged_runs;
  }
  report.completed_runs = static_cast<int>(completed.size());
  if (completed.empty())
    throw std::invalid_argument("no completed runs to report on");
  const std::size_t n_intervals = completed.front()->evaluations.size();
  for (const RunLog* log : completed)
    if (log->evaluations.size() != n_intervals)
      throw std::invalid_argument("runs have mismatched evaluation schedules");
  if (n_intervals == 0) return report;  // evaluation-free runs
  report.has_evaluations = true;

  for (std::size_t i = 0; i < n_intervals; ++i) {
    std::vector<double> means;
    means.reserve(completed.size());
    for (const RunLog* log : completed)
      means.push_back(log->evaluations[i].mean);
    report.per_interval.push_back(
        make_interval_stats(completed.front()->evaluations[i].step,
                            std::span<const double>(means)));
  }
  report.final_stats = report.per_interval.back();

  std::vector<double> bests;
  for (std::size_t r = 0; r < completed.size(); ++r) {
    RunBest best;
    best.run = static_cast<int>(r);
    best.best_score = completed[r]->evaluations.front().mean;
    best.step_of_best = completed[r]->evaluations.front().step;
    for (const EvaluationRecord& rec : completed[r]->evaluations) {
      if (rec.mean > best.best_score) {
        best.best_score = rec.mean;
        best.step_of_best = rec.step;  // earliest interval wins ties
      }
    }
    report.per_run_best.push_back(best);
    bests.push_back(best.best_score);
  }
  report.best_stats = make_interval_stats(-1, std::span<const double>(bests));
  return report;
}

GroupResult run_group(const GroupSpec& spec, const EvalSuite* start_suite,
                      const EvalSuite* sticky_suite, int parallelism) {
  const std::vector<AgentRunConfig> configs = build_group_configs(spec);
  const EvalSuite* suite =
      spec.kind == GroupKind::kEnvironment ? sticky_suite : start_suite;

  GroupResult result;
  result.spec = spec;
  result.logs.resize(configs.size());
  result.final_nets.resize(configs.size());

  unsigned n_workers = parallelism > 0
                           ? static_cast<unsigned>(parallelism)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers,
                                 static_cast<unsigned>(configs.size()));

  if (n_workers <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i)
      result.logs[i] = train_run(configs[i], suite, nullptr,
                                 &result.final_nets[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= configs.size()) return;
          result.logs[i] = train_run(configs[i], suite, nullptr,
                                     &result.final_nets[i]);
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
  }

  result.report = compute_group_report(spec.kind, result.logs);
  return result;
}

nlohmann::json group_report_to_json(const GroupReport& report) {
  using nlohmann::json;
  const auto interval_json = [](const IntervalStats& s) {
    json j{{"step", s.step}, {"mean", s.mean}, {"std", s.stddev}};
    if (s.rel_std_defined)
      j["rel_std"] = s.rel_std;
    else
      j["rel_std"] = nullptr;
    return j;
  };
  json per_interval = json::array();
  for (const IntervalStats& s : report.per_interval)
    per_interval.push_back(interval_json(s));
  json per_run_best = json::array();
  for (const RunBest& b : report.per_run_best)
    per_run_best.push_back({{"run", b.run},
                            {"step_of_best", b.step_of_best},
                            {"best_score", b.best_score}});
  return json{{"group", group_name(report.kind)},
              {"has_evaluations", report.has_evaluations},
              {"per_interval", per_interval},
              {"final", interval_json(report.final_stats)},
              {"best", interval_json(report.best_stats)},
              {"per_run_best", per_run_best},
              {"completed_runs", report.completed_runs},
              {"diverged_runs", report.diverged_runs}};
}

}  // namespace detrl
