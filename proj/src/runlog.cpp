#include "detrl/runlog.hpp"

#include <fstream>

#include "detrl/digest.hpp"
#include "detrl/version.hpp"

namespace detrl {

namespace {

using nlohmann::json;

void require_same_schedule(const RunLog& a, const RunLog& b) {
  if (a.checkpoints.size() != b.checkpoints.size() ||
      a.evaluations.size() != b.evaluations.size())
    throw IncomparableError("checkpoint schedules differ in length");
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
    if (a.checkpoints[i].step != b.checkpoints[i].step)
      throw IncomparableError("checkpoint steps differ at index " +
                              std::to_string(i));
  for (std::size_t i = 0; i < a.evaluations.size(); ++i) {
    if (a.evaluations[i].step != b.evaluations[i].step)
      throw IncomparableError("evaluation steps differ at index " +
                              std::to_string(i));
    if (a.evaluations[i].scores.size() != b.evaluations[i].scores.size())
      throw IncomparableError("evaluation suite sizes differ at step " +
                              std::to_string(a.evaluations[i].step));
  }
}

}  // namespace

ReplicationVerdict compare_runs(const RunLog& a, const RunLog& b) {
  require_same_schedule(a, b);

  // Collect candidate divergences, then report the earliest by step.
  // Checkpoint fields win ties against evaluation scores at the same step.
  std::optional<ReplicationVerdict::Divergence> earliest;
  auto consider = [&](long step, const std::string& field) {
    if (!earliest || step < earliest->step)
      earliest = ReplicationVerdict::Divergence{step, field};
  };

  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const Checkpoint& ca = a.checkpoints[i];
    const Checkpoint& cb = b.checkpoints[i];
    if (earliest && earliest->step <= ca.step) break;
    if (ca.weight_hash != cb.weight_hash) {
      consider(ca.step, "weight_hash");
      continue;
    }
    if (ca.draw_counts != cb.draw_counts) {
      std::string field = "draw_counts";
      for (const auto& [name, count] : ca.draw_counts) {
        auto it = cb.draw_counts.find(name);
        if (it == cb.draw_counts.end() || it->second != count) {
          field = "draw_counts." + name;
          break;
        }
      }
      consider(ca.step, field);
    }
  }
  for (std::size_t i = 0; i < a.evaluations.size(); ++i) {
    const EvaluationRecord& ea = a.evaluations[i];
    const EvaluationRecord& eb = b.evaluations[i];
    if (earliest && earliest->step < ea.step) break;
    if (ea.scores != eb.scores || ea.mean != eb.mean)
      consider(ea.step, "evaluation_scores");
  }

  ReplicationVerdict verdict;
  verdict.identical = !earliest.has_value();
  verdict.first_divergence = earliest;
  return verdict;
}

std::optional<long> first_divergence_step(const RunLog& a, const RunLog& b) {
  const ReplicationVerdict v = compare_runs(a, b);
  if (v.identical) return std::nullopt;
  return v.first_divergence->step;
}

nlohmann::json runlog_to_json(const RunLog& log) {
  json checkpoints = json::array();
  for (const Checkpoint& c : log.checkpoints) {
    json counts = json::object();
    for (const auto& [name, count] : c.draw_counts) counts[name] = count;
    checkpoints.push_back({{"step", c.step},
                           {"weight_hash", to_hex16(c.weight_hash)},
                           {"draw_counts", counts}});
  }
  json evaluations = json::array();
  for (const EvaluationRecord& e : log.evaluations)
    evaluations.push_back(
        {{"step", e.step}, {"scores", e.scores}, {"mean", e.mean}});
  json stream_seeds = json::object();
  for (const auto& [name, seed] : log.stream_seeds) stream_seeds[name] = seed;
  json j{{"schema_version", kRunLogSchemaVersion},
         {"version", log.version},
         {"config_fingerprint", log.config_fingerprint},
         {"outcome",
          log.outcome == RunOutcome::kCompleted ? "completed" : "diverged"},
         {"stream_seeds", stream_seeds},
         {"checkpoints", checkpoints},
         {"evaluations", evaluations}};
  if (log.outcome == RunOutcome::kDiverged) {
    j["divergence_step"] = log.divergence_step;
    j["divergence_message"] = log.divergence_message;
  }
  return j;
}

RunLog runlog_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kRunLogSchemaVersion)
    throw std::runtime_error("unsupported run log schema version");
  RunLog log;
  log.version = j.at("version").get<std::string>();
  log.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  log.outcome = j.at("outcome").get<std::string>() == "completed"
                    ? RunOutcome::kCompleted
                    : RunOutcome::kDiverged;
  if (log.outcome == RunOutcome::kDiverged) {
    log.divergence_step = j.at("divergence_step").get<long>();
    log.divergence_message = j.at("divergence_message").get<std::string>();
  }
  for (const auto& cj : j.at("checkpoints")) {
    Checkpoint c;
    c.step = cj.at("step").get<long>();
    c.weight_hash = parse_hex16(cj.at("weight_hash").get<std::string>());
    for (const auto& [name, count] : cj.at("draw_counts").items())
      c.draw_counts[name] = count.get<std::uint64_t>();
    log.checkpoints.push_back(std::move(c));
  }
  for (const auto& ej : j.at("evaluations")) {
    EvaluationRecord e;
    e.step = ej.at("step").get<long>();
    e.scores = ej.at("scores").get<std::vector<double>>();
    e.mean = ej.at("mean").get<double>();
    log.evaluations.push_back(std::move(e));
  }
  return log;
}

void save_runlog(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << runlog_to_json(log).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunLog load_runlog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  return runlog_from_json(j);
}

}  // namespace detrl
