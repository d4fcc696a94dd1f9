#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace detrl {

// The complete set of named seeds controlling every nondeterminism source
// of a training run. env_instance_seed fixes the environment content and is
// never varied by the sensitivity harness.
struct SeedSpec {
  std::uint64_t init_seed = 0;
  std::uint64_t exploration_seed = 0;
  std::uint64_t noop_seed = 0;
  std::uint64_t minibatch_seed = 0;
  std::uint64_t sticky_seed = 0;
  std::uint64_t compute_seed = 0;
  std::uint64_t env_instance_seed = 0;

  bool operator==(const SeedSpec&) const = default;
};

// Stateless splitmix64 mix step. Advances `state` and returns the next word.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Deterministically combines a base seed with an index (used to derive
// per-episode environment seeds from env_instance_seed).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// A named, single-owner xoshiro256** stream. Identical (seed, call sequence)
// gives identical outputs on every platform; draw_count counts consumed u64
// words. Every random draw in the system goes through one of these — there
// is no global RNG anywhere.
class RandomStream {
 public:
  RandomStream(std::string name, std::uint64_t seed);

  std::uint64_t next_u64();

  // (next_u64 >> 11) * 2^-53, in [0, 1). Consumes exactly one u64.
  double next_uniform();

  // Unbiased integer in [0, n) via classic modulo-rejection: a draw r is
  // accepted iff r >= 2^64 mod n, then reduced mod n. Consumes one u64 per
  // rejection round (>= 1 total). n == 0 is a domain error.
  std::uint64_t next_int(std::uint64_t n);

  // Standard normal via Box-Muller. A pair costs exactly two uniforms:
  // the radius uses log(1 - u1) (guarding u1 == 0), the angle uses u2.
  // cos is returned first, sin is cached and returned by the next call
  // without consuming anything.
  double next_gaussian();

  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw_count() const { return draw_count_; }

  // Re-derives a stream from (seed, draw_count) by fast-forwarding.
  // A pending Box-Muller cache is not part of the snapshot.
  static RandomStream replay(std::string name, std::uint64_t seed,
                             std::uint64_t draw_count);

 private:
  std::array<std::uint64_t, 4> state_{};
  std::string name_;
  std::uint64_t seed_ = 0;
  std::uint64_t draw_count_ = 0;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

RandomStream new_stream(std::string name, std::uint64_t seed);

}  // namespace detrl
