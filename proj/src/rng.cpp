#include "detrl/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace detrl {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base;
  std::uint64_t mixed = splitmix64_next(s);
  s = mixed ^ index;
  return splitmix64_next(s);
}

RandomStream::RandomStream(std::string name, std::uint64_t seed)
    : name_(std::move(name)), seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64_next(sm);
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  ++draw_count_;
  return result;
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::next_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_int: n must be >= 1");
  // (2^64 - n) mod n == 2^64 mod n; draws below this are rejected.
  const std::uint64_t threshold = (~n + 1) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double RandomStream::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = radius * std::sin(angle);
  has_cached_gaussian_ = true;
  return radius * std::cos(angle);
}

RandomStream RandomStream::replay(std::string name, std::uint64_t seed,
                                  std::uint64_t draw_count) {
  RandomStream s(std::move(name), seed);
  for (std::uint64_t i = 0; i < draw_count; ++i) s.next_u64();
  return s;
}

RandomStream new_stream(std::string name, std::uint64_t seed) {
  return RandomStream(std::move(name), seed);
}

}  // namespace detrl
