#include "detrl/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "detrl/digest.hpp"
#include "detrl/stats.hpp"
#include "detrl/version.hpp"

namespace detrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json groups = json::array();
  for (GroupKind kind : cfg.groups) groups.push_back(group_name(kind));
  return json{{"groups", groups},
              {"n_runs", cfg.n_runs},
              {"base_seeds", seeds_to_json(cfg.base_seeds)},
              {"hp", hyperparams_to_json(cfg.hp)},
              {"env", env_config_to_json(cfg.env)},
              {"suite_path", cfg.suite_path},
              {"sticky_suite_path", cfg.sticky_suite_path},
              {"output_dir", cfg.output_dir},
              {"parallelism", cfg.parallelism},
              {"episode_cap", cfg.episode_cap},
              {"suite_gen",
               {{"n_candidates", cfg.suite_gen.n_candidates},
                {"top_k", cfg.suite_gen.top_k},
                {"n_select", cfg.suite_gen.n_select},
                {"len_min", cfg.suite_gen.len_min},
                {"len_max", cfg.suite_gen.len_max}}}};
}

std::string experiment_fingerprint(const ExperimentConfig& cfg) {
  Fnv1a64 h;
  h.update_string(experiment_config_to_json(cfg).dump());
  return to_hex16(h.digest());
}

// Shortest round-trip decimal form, shared by every CSV writer.
std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  return json(v).dump();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

void write_header_comment(std::ofstream& out, const std::string& fingerprint) {
  out << "# detrl " << kVersion << " config=" << fingerprint << "\n";
}

void write_report_csv(const GroupReport& report, const fs::path& path,
                      const std::string& fingerprint) {
  std::ofstream out = open_out(path);
  write_header_comment(out, fingerprint);
  out << "step,mean,std,rel_std\n";
  for (const IntervalStats& s : report.per_interval)
    out << s.step << ',' << fmt_double(s.mean) << ',' << fmt_double(s.stddev)
        << ',' << fmt_double(s.rel_std) << '\n';
}

void write_curve_csv(const GroupReport& report, const fs::path& path,
                     const std::string& fingerprint) {
  std::ofstream out = open_out(path);
  write_header_comment(out, fingerprint);
  out << "step,mean,mean_minus_std,mean_plus_std\n";
  for (const IntervalStats& s : report.per_interval)
    out << s.step << ',' << fmt_double(s.mean) << ','
        << fmt_double(s.mean - s.stddev) << ','
        << fmt_double(s.mean + s.stddev) << '\n';
}

void write_per_start_state_csv(const RunLog& log, const fs::path& path,
                               const std::string& fingerprint) {
  std::ofstream out = open_out(path);
  write_header_comment(out, fingerprint);
  const auto series = per_start_state_curve(log);
  out << "step";
  for (std::size_t i = 0; i < series.size(); ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "s%03zu", i);
    out << ',' << buf;
  }
  out << '\n';
  if (series.empty()) return;
  for (std::size_t row = 0; row < series.front().size(); ++row) {
    out << series.front()[row].first;
    for (const auto& s : series) out << ',' << fmt_double(s[row].second);
    out << '\n';
  }
}

struct LoadedGroup {
  GroupKind kind;
  std::vector<RunLog> logs;
};

std::vector<LoadedGroup> load_groups_from_dir(const fs::path& dir) {
  std::vector<LoadedGroup> groups;
  for (GroupKind kind : all_group_kinds()) {
    const fs::path group_dir = dir / (std::string("group_") + group_name(kind));
    if (!fs::is_directory(group_dir)) continue;
    LoadedGroup group{kind, {}};
    for (int run = 0;; ++run) {
      const fs::path log_path =
          group_dir / ("run_" + std::to_string(run) + ".runlog.json");
      if (!fs::exists(log_path)) break;
      group.logs.push_back(load_runlog(log_path));
    }
    if (!group.logs.empty()) groups.push_back(std::move(group));
  }
  return groups;
}

std::string fmt_metric(double v, bool percent) {
  std::ostringstream os;
  if (std::isnan(v)) {
    os << "undef";
  } else {
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    if (percent) os << '%';
  }
  return os.str();
}

void write_summary_table(
    const std::vector<std::pair<GroupKind, GroupReport>>& reports,
    const fs::path& path, const std::string& fingerprint) {
  const std::vector<std::string> metric_names = {
      "Average Score (Best)",
      "Standard Deviation (Best)",
      "Relative Standard Deviation (Best)",
      "Average Score (Final)",
      "Standard Deviation (Final)",
      "Relative Standard Deviation (Final)"};
  const auto metric_value = [](const GroupReport& r, std::size_t m) {
    switch (m) {
      case 0: return fmt_metric(r.best_stats.mean, false);
      case 1: return fmt_metric(r.best_stats.stddev, false);
      case 2: return fmt_metric(r.best_stats.rel_std, true);
      case 3: return fmt_metric(r.final_stats.mean, false);
      case 4: return fmt_metric(r.final_stats.stddev, false);
      default: return fmt_metric(r.final_stats.rel_std, true);
    }
  };

  std::size_t name_width = 0;
  for (const auto& n : metric_names) name_width = std::max(name_width, n.size());
  constexpr std::size_t kColWidth = 16;

  std::ofstream out = open_out(path);
  write_header_comment(out, fingerprint);
  const auto col = [&](const std::string& s) {
    out << "  " << s;
    if (s.size() < kColWidth - 2)
      out << std::string(kColWidth - 2 - s.size(), ' ');
  };
  out << std::string(name_width, ' ');
  for (const auto& [kind, report] : reports) col(group_name(kind));
  out << '\n';
  for (std::size_t m = 0; m < metric_names.size(); ++m) {
    out << metric_names[m]
        << std::string(name_width - metric_names[m].size(), ' ');
    for (const auto& [kind, report] : reports) col(metric_value(report, m));
    out << '\n';
  }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  try {
    if (!j.contains("groups") || !j["groups"].is_array() ||
        j["groups"].empty())
      throw ConfigError("config field 'groups' must be a non-empty array");
    for (const auto& g : j["groups"])
      cfg.groups.push_back(group_kind_from_name(g.get<std::string>()));
    cfg.n_runs = j.value("n_runs", cfg.n_runs);
    if (cfg.n_runs < 1) throw ConfigError("config field 'n_runs' must be >= 1");
    if (j.contains("base_seeds")) cfg.base_seeds = seeds_from_json(j["base_seeds"]);
    if (j.contains("hp")) cfg.hp = hyperparams_from_json(j["hp"]);
    if (j.contains("env")) cfg.env = env_config_from_json(j["env"]);
    cfg.suite_path = j.value("suite_path", std::string());
    cfg.sticky_suite_path = j.value("sticky_suite_path", std::string());
    cfg.output_dir = j.value("output_dir", std::string());
    cfg.parallelism = j.value("parallelism", 0);
    cfg.episode_cap = j.value("episode_cap", cfg.episode_cap);
    if (j.contains("suite_gen")) {
      const json& sg = j["suite_gen"];
      cfg.suite_gen.n_candidates =
          sg.value("n_candidates", cfg.suite_gen.n_candidates);
      cfg.suite_gen.top_k = sg.value("top_k", cfg.suite_gen.top_k);
      cfg.suite_gen.n_select = sg.value("n_select", cfg.suite_gen.n_select);
      cfg.suite_gen.len_min = sg.value("len_min", cfg.suite_gen.len_min);
      cfg.suite_gen.len_max = sg.value("len_max", cfg.suite_gen.len_max);
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed config field: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void apply_seed_override(SeedSpec& seeds, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("seed override must look like field=value: " + spec);
  const std::string field = spec.substr(0, eq);
  std::uint64_t value = 0;
  try {
    value = std::stoull(spec.substr(eq + 1), nullptr, 0);
  } catch (const std::exception&) {
    throw ConfigError("invalid seed value in override: " + spec);
  }
  if (field == "init_seed") seeds.init_seed = value;
  else if (field == "exploration_seed") seeds.exploration_seed = value;
  else if (field == "noop_seed") seeds.noop_seed = value;
  else if (field == "minibatch_seed") seeds.minibatch_seed = value;
  else if (field == "sticky_seed") seeds.sticky_seed = value;
  else if (field == "compute_seed") seeds.compute_seed = value;
  else if (field == "env_instance_seed") seeds.env_instance_seed = value;
  else throw ConfigError("unknown seed field in override: " + field);
}

std::string resolve_output_dir(const std::string& flag_value,
                               const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DETRL_OUTPUT_DIR"); env && *env)
    return env;
  return config_value;
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              std::optional<int> parallelism_override,
              const std::vector<std::string>& seed_overrides) {
  ExperimentConfig cfg;
  EvalSuite start_suite, sticky_suite;
  bool have_start = false, have_sticky = false;
  try {
    cfg = load_experiment_config(config_path);
    for (const std::string& o : seed_overrides)
      apply_seed_override(cfg.base_seeds, o);
    if (parallelism_override) cfg.parallelism = *parallelism_override;
    cfg.output_dir = resolve_output_dir(out_override, cfg.output_dir);
    if (cfg.output_dir.empty())
      throw ConfigError("no output directory (use --out, DETRL_OUTPUT_DIR, "
                        "or config 'output_dir')");

    const bool wants_env_group =
        std::find(cfg.groups.begin(), cfg.groups.end(),
                  GroupKind::kEnvironment) != cfg.groups.end();
    if (!cfg.suite_path.empty()) {
      if (!fs::exists(cfg.suite_path))
        throw ConfigError("suite file does not exist: " + cfg.suite_path);
      start_suite = load_suite(cfg.suite_path);
      have_start = true;
      if (wants_env_group) {
        if (cfg.sticky_suite_path.empty())
          throw ConfigError(
              "environment group needs 'sticky_suite_path' when evaluations "
              "are enabled");
        if (!fs::exists(cfg.sticky_suite_path))
          throw ConfigError("sticky suite file does not exist: " +
                            cfg.sticky_suite_path);
        sticky_suite = load_suite(cfg.sticky_suite_path);
        have_sticky = true;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const std::string fingerprint = experiment_fingerprint(cfg);
  try {
    fs::create_directories(cfg.output_dir);
    const fs::path out_dir(cfg.output_dir);

    {
      std::ofstream out = open_out(out_dir / "experiment.json");
      out << json{{"version", kVersion},
                  {"config_fingerprint", fingerprint},
                  {"config", experiment_config_to_json(cfg)}}
                 .dump(2)
          << '\n';
    }
    {
      // The only place wall-clock time is allowed to appear.
      const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
      std::ofstream out = open_out(out_dir / "metadata.json");
      out << json{{"created_unix_ms", now}, {"command", "train"}}.dump(2)
          << '\n';
    }

    int total_diverged = 0;
    for (GroupKind kind : cfg.groups) {
      const GroupSpec spec =
          make_group_spec(kind, cfg.base_seeds, cfg.hp, cfg.env, cfg.n_runs);
      const GroupResult result =
          run_group(spec, have_start ? &start_suite : nullptr,
                    have_sticky ? &sticky_suite : nullptr, cfg.parallelism);

      const fs::path group_dir =
          out_dir / (std::string("group_") + group_name(kind));
      fs::create_directories(group_dir);
      for (std::size_t i = 0; i < result.logs.size(); ++i) {
        save_runlog(result.logs[i],
                    group_dir / ("run_" + std::to_string(i) + ".runlog.json"));
        save_network(result.final_nets[i],
                     group_dir / ("run_" + std::to_string(i) + ".net"));
      }
      {
        std::ofstream out = open_out(group_dir / "report.json");
        json report_json = group_report_to_json(result.report);
        report_json["version"] = kVersion;
        report_json["config_fingerprint"] = fingerprint;
        out << report_json.dump(2) << '\n';
      }
      if (result.report.has_evaluations)
        write_report_csv(result.report, group_dir / "report.csv", fingerprint);

      total_diverged += result.report.diverged_runs;
      std::cout << "group " << group_name(kind) << ": "
                << result.report.completed_runs << " runs completed";
      if (result.report.diverged_runs > 0)
        std::cout << ", " << result.report.diverged_runs << " diverged";
      std::cout << '\n';
    }
    if (total_diverged > 0)
      std::cerr << "warning: " << total_diverged
                << " run(s) diverged; statistics cover completed runs only\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "train failed: " << e.what() << '\n';
    return 2;
  }
}

int cmd_verify(const std::string& log_a_path, const std::string& log_b_path) {
  RunLog a, b;
  try {
    a = load_runlog(log_a_path);
    b = load_runlog(log_b_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot read run logs: " << e.what() << '\n';
    return 2;
  }
  try {
    const ReplicationVerdict verdict = compare_runs(a, b);
    if (verdict.identical) {
      std::cout << "identical: true\n";
      return 0;
    }
    std::cout << "identical: false\n";
    std::cout << "first_divergence_step: " << verdict.first_divergence->step
              << '\n';
    std::cout << "first_divergence_field: " << verdict.first_divergence->field
              << '\n';
    return 1;
  } catch (const IncomparableError& e) {
    std::cerr << "incomparable run logs: " << e.what() << '\n';
    return 2;
  }
}

int cmd_gen_suite(const std::string& config_path,
                  const std::string& ranker_path, std::uint64_t seed,
                  const std::string& out_path, const std::string& kind) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  if (out_path.empty()) {
    std::cerr << "gen-suite needs an output path\n";
    return 2;
  }
  try {
    EvalSuite suite;
    if (kind == "start-states") {
      if (ranker_path.empty() || !fs::exists(ranker_path)) {
        std::cerr << "start-state generation needs an existing ranker "
                     "network file\n";
        return 2;
      }
      const QNetwork ranker = load_network(ranker_path);
      EnvConfig env = cfg.env;
      env.sticky_p = 0.0;  // sequences are rolled in the raw environment
      RandomStream gen("suite-gen", seed);
      suite = make_start_state_suite(ranker, env, gen, cfg.suite_gen,
                                     cfg.episode_cap);
    } else if (kind == "sticky-seeds") {
      RandomStream gen("suite-gen", seed);
      suite = make_sticky_suite(gen, cfg.suite_gen.n_select, cfg.episode_cap);
    } else {
      std::cerr << "unknown suite kind: " << kind
                << " (expected start-states or sticky-seeds)\n";
      return 2;
    }
    save_suite(suite, out_path);
    std::cout << "wrote " << out_path << " (" << suite.size()
              << " entries)\n";
    return 0;
  } catch (const SuiteGenError& e) {
    std::cerr << "suite generation shortfall: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid generation parameters: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gen-suite failed: " << e.what() << '\n';
    return 2;
  }
}

int cmd_report(const std::string& output_dir) {
  try {
    const fs::path dir(output_dir);
    if (!fs::is_directory(dir)) {
      std::cerr << "not a directory: " << output_dir << '\n';
      return 1;
    }
    std::string fingerprint(16, '0');
    const fs::path experiment_path = dir / "experiment.json";
    if (fs::exists(experiment_path)) {
      std::ifstream in(experiment_path);
      json j;
      in >> j;
      fingerprint = j.value("config_fingerprint", fingerprint);
    }
    const std::vector<LoadedGroup> groups = load_groups_from_dir(dir);
    if (groups.empty()) {
      std::cerr << "no group run logs under " << output_dir << '\n';
      return 1;
    }
    std::vector<std::pair<GroupKind, GroupReport>> reports;
    for (const LoadedGroup& g : groups) {
      GroupReport report = compute_group_report(g.kind, g.logs);
      if (!report.has_evaluations) continue;
      const fs::path group_dir =
          dir / (std::string("group_") + group_name(g.kind));
      write_curve_csv(report, group_dir / "curve.csv", fingerprint);
      write_per_start_state_csv(g.logs.front(),
                                group_dir / "per_start_state.csv", fingerprint);
      reports.emplace_back(g.kind, std::move(report));
    }
    if (reports.empty()) {
      std::cerr << "run logs carry no evaluations to report on\n";
      return 1;
    }
    write_summary_table(reports, dir / "summary.txt", fingerprint);
    std::cout << "report written for " << reports.size() << " group(s) under "
              << output_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace detrl
