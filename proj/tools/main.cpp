#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detrl/cli.hpp"
#include "detrl/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"detrl - deterministic deep Q-learning experiment harness"};
  app.set_version_flag("--version", std::string("detrl ") + detrl::kVersion);
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand(
      "train", "Run the configured experimental groups and write run logs");
  std::string train_config;
  std::string train_out;
  int train_parallelism = -1;
  std::vector<std::string> seed_overrides;
  train->add_option("--config", train_config, "experiment config file")
      ->required();
  train->add_option("--out", train_out,
                    "output directory (falls back to $DETRL_OUTPUT_DIR)");
  train->add_option("--parallelism", train_parallelism,
                    "max concurrent runs (0 = auto)");
  train->add_option("--seed-override", seed_overrides,
                    "override a base seed, e.g. init_seed=42");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Compare two run logs for exact replication");
  std::string log_a, log_b;
  verify->add_option("log_a", log_a, "first run log")->required();
  verify->add_option("log_b", log_b, "second run log")->required();

  // gen-suite
  auto* gen = app.add_subcommand(
      "gen-suite", "Generate a fixed evaluation suite file");
  std::string gen_config, gen_ranker, gen_out;
  std::uint64_t gen_seed = 0;
  std::string gen_kind = "start-states";
  gen->add_option("--config", gen_config, "experiment config file")
      ->required();
  gen->add_option("--ranker", gen_ranker,
                  "trained network file used to rank candidate start states");
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "suite output path")->required();
  gen->add_option("--kind", gen_kind, "start-states or sticky-seeds");

  // report
  auto* report = app.add_subcommand(
      "report", "Emit plot-data CSVs and a summary table from run logs");
  std::string report_out;
  report->add_option("--out", report_out,
                     "experiment output directory "
                     "(falls back to $DETRL_OUTPUT_DIR)");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    std::optional<int> parallelism;
    if (train_parallelism >= 0) parallelism = train_parallelism;
    return detrl::cmd_train(train_config, train_out, parallelism,
                            seed_overrides);
  }
  if (verify->parsed()) return detrl::cmd_verify(log_a, log_b);
  if (gen->parsed())
    return detrl::cmd_gen_suite(gen_config, gen_ranker, gen_seed, gen_out,
                                gen_kind);
  if (report->parsed()) {
    const std::string dir = detrl::resolve_output_dir(report_out, "");
    if (dir.empty()) {
      std::fprintf(stderr, "report needs --out or $DETRL_OUTPUT_DIR\n");
      return 1;
    }
    return detrl::cmd_report(dir);
  }
  return 2;
}
