#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace detrl {

// One checkpointed observation of a run: the weight hash certifies the
// network bit-exactly, the per-stream draw counts localize a divergence to
// a nondeterminism source, which score curves alone cannot.
struct Checkpoint {
  long step = 0;
  std::uint64_t weight_hash = 0;
  std::map<std::string, std::uint64_t> draw_counts;
};

struct EvaluationRecord {
  long step = 0;
  std::vector<double> scores;  // per start state / sticky seed, suite order
  double mean = 0.0;
};

enum class RunOutcome { kCompleted, kDiverged };

struct RunLog {
  std::string config_fingerprint;  // 16 hex digits
  std::string version;
  RunOutcome outcome = RunOutcome::kCompleted;
  long divergence_step = -1;
  std::string divergence_message;
  // Seed per named stream; with a checkpoint's draw_counts this is a full
  // stream snapshot (replayable by fast-forwarding).
  std::map<std::string, std::uint64_t> stream_seeds;
  std::vector<Checkpoint> checkpoints;
  std::vector<EvaluationRecord> evaluations;
};

struct ReplicationVerdict {
  struct Divergence {
    long step = 0;
    std::string field;
  };
  bool identical = false;
  std::optional<Divergence> first_divergence;
};

class IncomparableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact comparison of two runs sharing a checkpoint schedule: identical iff
// every weight hash, draw count and evaluation score matches. Reports the
// earliest mismatching checkpoint and field otherwise.
ReplicationVerdict compare_runs(const RunLog& a, const RunLog& b);

std::optional<long> first_divergence_step(const RunLog& a, const RunLog& b);

nlohmann::json runlog_to_json(const RunLog& log);
RunLog runlog_from_json(const nlohmann::json& j);

void save_runlog(const RunLog& log, const std::filesystem::path& path);
RunLog load_runlog(const std::filesystem::path& path);

}  // namespace detrl
