#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "detrl/digest.hpp"
#include "detrl/rng.hpp"
#include "golden/xoshiro_golden.hpp"

using detrl::RandomStream;
using detrl::new_stream;

TEST_CASE("golden vectors: first 1000 outputs for seeds 0, 1, 0xDEADBEEF") {
  const struct {
    std::uint64_t seed;
    const std::array<std::uint64_t, 1000>& expected;
  } cases[] = {
      {0, detrl_golden::kXoshiroSeed0},
      {1, detrl_golden::kXoshiroSeed1},
      {0xDEADBEEF, detrl_golden::kXoshiroSeedDEADBEEF},
  };
  for (const auto& c : cases) {
    RandomStream s = new_stream("golden", c.seed);
    for (std::size_t i = 0; i < detrl_golden::kGoldenCount; ++i) {
      INFO("seed ", c.seed, " index ", i);
      REQUIRE(s.next_u64() == c.expected[i]);
    }
  }
}

TEST_CASE("same seed, same calls give identical sequences") {
  RandomStream a = new_stream("a", 42);
  RandomStream b = new_stream("b", 42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("seeds 1 and 2 differ somewhere in the first 100 outputs") {
  RandomStream a = new_stream("a", 1);
  RandomStream b = new_stream("b", 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() != b.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("draw_count counts consumed words") {
  RandomStream s = new_stream("s", 7);
  CHECK(s.draw_count() == 0);
  for (int i = 0; i < 5; ++i) s.next_u64();
  CHECK(s.draw_count() == 5);
  s.next_uniform();
  CHECK(s.draw_count() == 6);
}

TEST_CASE("stream copy replays the same tail") {
  RandomStream a = new_stream("a", 99);
  a.next_u64();
  RandomStream b = a;  // clone mid-sequence
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform endpoints map as documented") {
  // (u >> 11) * 2^-53: zero word gives 0.0, all-ones gives (2^53-1)/2^53.
  CHECK(static_cast<double>(std::uint64_t{0} >> 11) * 0x1.0p-53 == 0.0);
  const double top =
      static_cast<double>(~std::uint64_t{0} >> 11) * 0x1.0p-53;
  CHECK(top < 1.0);
  CHECK(top == (static_cast<double>((std::uint64_t{1} << 53) - 1) /
                static_cast<double>(std::uint64_t{1} << 53)));
}

TEST_CASE("uniform mean over 1e6 draws is centered") {
  for (std::uint64_t seed : {0ull, 123ull, 0xDEADBEEFull}) {
    RandomStream s = new_stream("u", seed);
    double sum = 0.0;
    for (int i = 0; i < 1000000; ++i) sum += s.next_uniform();
    const double mean = sum / 1e6;
    INFO("seed ", seed);
    CHECK(mean > 0.499);
    CHECK(mean < 0.501);
  }
}

TEST_CASE("next_int bounds and domain error") {
  RandomStream s = new_stream("i", 5);
  for (int i = 0; i < 100; ++i) CHECK(s.next_int(1) == 0);
  CHECK_THROWS_AS(s.next_int(0), std::invalid_argument);
}

TEST_CASE("next_int is unbiased across 6 buckets") {
  RandomStream s = new_stream("dice", 2024);
  const int n_draws = 600000;
  int counts[6] = {0, 0, 0, 0, 0, 0};
  for (int i = 0; i < n_draws; ++i) ++counts[s.next_int(6)];
  // 3 sigma of a binomial with p = 1/6
  const double expected = n_draws / 6.0;
  const double sigma = std::sqrt(n_draws * (1.0 / 6.0) * (5.0 / 6.0));
  for (int b = 0; b < 6; ++b) {
    INFO("bucket ", b);
    CHECK(std::fabs(counts[b] - expected) < 3.0 * sigma);
  }
}

TEST_CASE("next_int sequences are reproducible") {
  RandomStream a = new_stream("a", 31337);
  RandomStream b = new_stream("b", 31337);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_int(10) == b.next_int(10));
}

TEST_CASE("gaussian pair caching consumes no extra draws") {
  RandomStream s = new_stream("g", 5);
  s.next_gaussian();
  const std::uint64_t after_first = s.draw_count();
  CHECK(after_first == 2);  // two uniforms per Box-Muller pair
  s.next_gaussian();        // cached value
  CHECK(s.draw_count() == after_first);
  s.next_gaussian();  // fresh pair
  CHECK(s.draw_count() == after_first + 2);
}

TEST_CASE("gaussian moments over 1e6 draws") {
  RandomStream s = new_stream("g", 77);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_gaussian();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean > -0.005);
  CHECK(mean < 0.005);
  CHECK(var > 0.99);
  CHECK(var < 1.01);
}

TEST_CASE("streams are independent: interleaving does not change outputs") {
  RandomStream solo = new_stream("solo", 11);
  std::vector<std::uint64_t> expected;
  for (int i = 0; i < 50; ++i) expected.push_back(solo.next_u64());

  RandomStream a = new_stream("a", 11);
  RandomStream noise = new_stream("noise", 12);
  std::vector<std::uint64_t> interleaved;
  for (int i = 0; i < 50; ++i) {
    for (int k = 0; k < i % 3; ++k) noise.next_u64();
    interleaved.push_back(a.next_u64());
  }
  CHECK(interleaved == expected);
}

TEST_CASE("replay from (seed, draw_count) reproduces the next output") {
  RandomStream s = new_stream("r", 123456);
  for (int i = 0; i < 37; ++i) s.next_u64();
  RandomStream replayed =
      RandomStream::replay("r", s.seed(), s.draw_count());
  CHECK(replayed.next_u64() == s.next_u64());
  CHECK(replayed.draw_count() == s.draw_count());
}

TEST_CASE("derive_seed separates episode indices") {
  const std::uint64_t a = detrl::derive_seed(42, 0);
  const std::uint64_t b = detrl::derive_seed(42, 1);
  const std::uint64_t c = detrl::derive_seed(43, 0);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(detrl::derive_seed(42, 0) == a);
}

TEST_CASE("hex digest round-trip") {
  CHECK(detrl::to_hex16(0) == "0000000000000000");
  CHECK(detrl::to_hex16(0xdeadbeef12345678ull) == "deadbeef12345678");
  CHECK(detrl::parse_hex16("deadbeef12345678") == 0xdeadbeef12345678ull);
  CHECK_THROWS_AS(detrl::parse_hex16("xyz"), std::invalid_argument);
}
