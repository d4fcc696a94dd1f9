#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <span>

#include "detrl/cli.hpp"
#include "detrl/digest.hpp"
#include "detrl/dqn.hpp"
#include "detrl/env.hpp"
#include "detrl/evalproto.hpp"
#include "detrl/network.hpp"
#include "detrl/replay.hpp"
#include "detrl/rng.hpp"
#include "detrl/runlog.hpp"
#include "detrl/sensitivity.hpp"
#include "detrl/stats.hpp"
#include "detrl/version.hpp"

namespace py = pybind11;
using namespace detrl;

namespace {

// RunLog crosses the boundary as parsed JSON (dicts/lists) so python-side
// tooling can plot or diff without a schema mirror.
py::object runlog_to_py(const RunLog& log) {
  const py::module_ json = py::module_::import("json");
  return json.attr("loads")(runlog_to_json(log).dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic deep Q-learning training and evaluation core";
  m.attr("__version__") = kVersion;

  py::class_<SeedSpec>(m, "SeedSpec")
      .def(py::init<>())
      .def_readwrite("init_seed", &SeedSpec::init_seed)
      .def_readwrite("exploration_seed", &SeedSpec::exploration_seed)
      .def_readwrite("noop_seed", &SeedSpec::noop_seed)
      .def_readwrite("minibatch_seed", &SeedSpec::minibatch_seed)
      .def_readwrite("sticky_seed", &SeedSpec::sticky_seed)
      .def_readwrite("compute_seed", &SeedSpec::compute_seed)
      .def_readwrite("env_instance_seed", &SeedSpec::env_instance_seed)
      .def("__eq__", [](const SeedSpec& a, const SeedSpec& b) { return a == b; });

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::string, std::uint64_t>(), py::arg("name"),
           py::arg("seed"))
      .def("next_u64", &RandomStream::next_u64)
      .def("next_uniform", &RandomStream::next_uniform)
      .def("next_int", &RandomStream::next_int, py::arg("n"))
      .def("next_gaussian", &RandomStream::next_gaussian)
      .def_property_readonly("name", &RandomStream::name)
      .def_property_readonly("seed", &RandomStream::seed)
      .def_property_readonly("draw_count", &RandomStream::draw_count)
      .def_static("replay", &RandomStream::replay, py::arg("name"),
                  py::arg("seed"), py::arg("draw_count"));

  m.def("new_stream", &new_stream, py::arg("name"), py::arg("seed"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("index"));

  py::enum_<Action>(m, "Action")
      .value("LEFT", Action::kLeft)
      .value("STAY", Action::kStay)
      .value("RIGHT", Action::kRight);

  py::class_<CatchState>(m, "CatchState")
      .def_readonly("grid_w", &CatchState::grid_w)
      .def_readonly("grid_h", &CatchState::grid_h)
      .def_readonly("ball_col", &CatchState::ball_col)
      .def_readonly("ball_row", &CatchState::ball_row)
      .def_readonly("paddle_col", &CatchState::paddle_col)
      .def_readonly("balls_elapsed", &CatchState::balls_elapsed)
      .def_readonly("t", &CatchState::t)
      .def_readonly("terminal", &CatchState::terminal);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("grid_w", &EnvConfig::grid_w)
      .def_readwrite("grid_h", &EnvConfig::grid_h)
      .def_readwrite("sticky_p", &EnvConfig::sticky_p)
      .def_readwrite("max_noops", &EnvConfig::max_noops)
      .def_readwrite("episode_len", &EnvConfig::episode_len)
      .def_readwrite("env_instance_seed", &EnvConfig::env_instance_seed);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("terminal", &StepResult::terminal);

  py::class_<CatchEnv>(m, "CatchEnv")
      .def(py::init<const EnvConfig&>(), py::arg("config"))
      .def("reset", &CatchEnv::reset, py::arg("episode_index"))
      .def("step",
           [](CatchEnv& env, int action) {
             return env.step(static_cast<Action>(action));
           },
           py::arg("action"))
      .def_property_readonly("state", &CatchEnv::state)
      .def_property_readonly("steps_per_ball", &CatchEnv::steps_per_ball);

  m.def("state_digest",
        [](const CatchState& s) { return to_hex16(state_digest(s)); });
  m.def("featurize", &featurize, py::arg("state"));
  m.def("feature_length", &feature_length, py::arg("env_config"));

  py::enum_<ComputeKind>(m, "ComputeKind")
      .value("DETERMINISTIC", ComputeKind::kDeterministic)
      .value("PERTURBED_REDUCTION", ComputeKind::kPerturbedReduction);

  py::class_<QNetwork>(m, "QNetwork")
      .def_readonly("layer_sizes", &QNetwork::layer_sizes)
      .def("weight_hash",
           [](const QNetwork& net) { return to_hex16(weight_hash(net)); })
      .def("forward",
           [](const QNetwork& net, const std::vector<float>& input) {
             return forward<float>(net, std::span<const float>(input));
           },
           py::arg("input"));

  m.def("init_network",
        [](const std::vector<int>& sizes, RandomStream& stream) {
          return init_network(sizes, stream);
        },
        py::arg("layer_sizes"), py::arg("init_stream"));
  m.def("save_network", &save_network, py::arg("net"), py::arg("path"));
  m.def("load_network", &load_network, py::arg("path"));

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("gamma", &Hyperparams::gamma)
      .def_readwrite("eps_start", &Hyperparams::eps_start)
      .def_readwrite("eps_end", &Hyperparams::eps_end)
      .def_readwrite("eps_anneal_steps", &Hyperparams::eps_anneal_steps)
      .def_readwrite("target_sync_interval", &Hyperparams::target_sync_interval)
      .def_readwrite("batch_size", &Hyperparams::batch_size)
      .def_readwrite("train_every", &Hyperparams::train_every)
      .def_readwrite("total_steps", &Hyperparams::total_steps)
      .def_readwrite("eval_interval", &Hyperparams::eval_interval)
      .def_readwrite("learn_start", &Hyperparams::learn_start)
      .def_readwrite("replay_capacity", &Hyperparams::replay_capacity)
      .def_readwrite("hidden_sizes", &Hyperparams::hidden_sizes)
      .def_readwrite("learning_rate", &Hyperparams::learning_rate)
      .def_readwrite("rms_decay", &Hyperparams::rms_decay)
      .def_readwrite("rms_epsilon", &Hyperparams::rms_epsilon);

  py::class_<AgentRunConfig>(m, "AgentRunConfig")
      .def(py::init<>())
      .def_readwrite("seeds", &AgentRunConfig::seeds)
      .def_readwrite("hp", &AgentRunConfig::hp)
      .def_readwrite("env", &AgentRunConfig::env)
      .def_readwrite("compute_kind", &AgentRunConfig::compute_kind);

  m.def("epsilon_at", &epsilon_at, py::arg("t"), py::arg("hp"));
  m.def("config_fingerprint", &config_fingerprint, py::arg("config"));

  py::class_<EvalSuite>(m, "EvalSuite")
      .def_property_readonly("episode_cap",
                             [](const EvalSuite& s) { return s.episode_cap; })
      .def_property_readonly("size", &EvalSuite::size)
      .def_property_readonly("kind", [](const EvalSuite& s) {
        return s.kind == SuiteKind::kStartStates ? "start_states"
                                                 : "sticky_seeds";
      });

  m.def("load_suite", &load_suite, py::arg("path"));
  m.def("save_suite", &save_suite, py::arg("suite"), py::arg("path"));
  m.def("make_sticky_suite",
        [](RandomStream& gen, int n, long cap) {
          return make_sticky_suite(gen, n, cap);
        },
        py::arg("gen_stream"), py::arg("n_seeds"), py::arg("episode_cap"));
  m.def("make_start_state_suite",
        [](const QNetwork& ranker, const EnvConfig& env, RandomStream& gen,
           int n_candidates, int top_k, int n_select, int len_min,
           int len_max, long episode_cap) {
          SuiteGenParams params{n_candidates, top_k, n_select, len_min,
                                len_max};
          return make_start_state_suite(ranker, env, gen, params, episode_cap);
        },
        py::arg("ranker"), py::arg("env_config"), py::arg("gen_stream"),
        py::arg("n_candidates") = 1000, py::arg("top_k") = 250,
        py::arg("n_select") = 100, py::arg("len_min") = 2,
        py::arg("len_max") = 6, py::arg("episode_cap") = 200);

  m.def("evaluate",
        [](const QNetwork& net, const EvalSuite& suite, const EnvConfig& env) {
          const EvalResult r = evaluate(net, suite, env);
          return py::make_tuple(r.per_episode_scores, r.mean, r.stddev);
        },
        py::arg("net"), py::arg("suite"), py::arg("env_config"));

  m.def("train_run",
        [](const AgentRunConfig& cfg,
           const std::optional<EvalSuite>& suite) {
          RunLog log;
          {
            py::gil_scoped_release release;
            log = train_run(cfg, suite.has_value() ? &*suite : nullptr);
          }
          return runlog_to_py(log);
        },
        py::arg("config"), py::arg("suite") = std::nullopt);

  m.def("compare_runs",
        [](const std::string& path_a, const std::string& path_b) {
          const ReplicationVerdict v =
              compare_runs(load_runlog(path_a), load_runlog(path_b));
          py::dict out;
          out["identical"] = v.identical;
          if (v.first_divergence) {
            out["first_divergence_step"] = v.first_divergence->step;
            out["first_divergence_field"] = v.first_divergence->field;
          }
          return out;
        },
        py::arg("runlog_path_a"), py::arg("runlog_path_b"));

  m.def("rel_std", &rel_std, py::arg("mean"), py::arg("std"));
  m.def("variance_test",
        [](const std::vector<double>& a, const std::vector<double>& b,
           double alpha) {
          const VarianceTestResult r = variance_test(a, b, alpha);
          py::dict out;
          out["statistic"] = r.statistic;
          out["p_value"] = r.p_value;
          out["significant"] = r.significant;
          out["degenerate"] = r.degenerate;
          return out;
        },
        py::arg("scores_a"), py::arg("scores_b"), py::arg("alpha") = 0.1);

  m.def("cmd_train",
        [](const std::string& config, const std::string& out, int parallelism,
           const std::vector<std::string>& overrides) {
          std::optional<int> p;
          if (parallelism >= 0) p = parallelism;
          return cmd_train(config, out, p, overrides);
        },
        py::arg("config_path"), py::arg("out") = "",
        py::arg("parallelism") = -1,
        py::arg("seed_overrides") = std::vector<std::string>{});
  m.def("cmd_verify", &cmd_verify, py::arg("log_a"), py::arg("log_b"));
  m.def("cmd_gen_suite", &cmd_gen_suite, py::arg("config_path"),
        py::arg("ranker_path"), py::arg("seed"), py::arg("out_path"),
        py::arg("kind") = "start-states");
  m.def("cmd_report", &cmd_report, py::arg("output_dir"));
}
