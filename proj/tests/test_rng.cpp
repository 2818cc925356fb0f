#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ssrm/rng.hpp"

using namespace ssrm;

TEST_CASE("fnv1a64 matches the published test vectors") {
  // Reference values from the FNV-1a 64-bit test suite.
  CHECK(fnv1a64("", 0) == 14695981039346656037ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("abc", 3) == 0xe71fa2190541574bull);
}

TEST_CASE("fnv1a64 streaming equals one-shot") {
  const std::string s = "hello feature hashing";
  const std::uint64_t oneshot = fnv1a64(s.data(), s.size(), 7);
  std::uint64_t h = fnv1a64_init(7);
  h = fnv1a64_update(h, s.data(), 10);
  h = fnv1a64_update(h, s.data() + 10, s.size() - 10);
  CHECK(h == oneshot);
}

TEST_CASE("fnv1a64 seed perturbs the hash") {
  const std::string s = "token";
  CHECK(fnv1a64(s.data(), s.size(), 0) != fnv1a64(s.data(), s.size(), 1));
}

TEST_CASE("splitmix64 matches the reference mix") {
  // First outputs of the canonical splitmix64 generator for these states.
  CHECK(splitmix64(0) == 16294208416658607535ull);
  CHECK(splitmix64(1234567) == 6457827717110365317ull);
}

TEST_CASE("derive_seed separates streams and masters") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
  // No collisions across a modest fan-out.
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
  CHECK(seen.size() == 1000);
}

TEST_CASE("Rng reproduces the standard mt19937_64 sequence") {
  // [rand.predef]: the 10000th draw of mt19937_64 seeded with 5489.
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("Rng same seed same stream, different seed different stream") {
  Rng a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("next_unit stays in [0,1) and is roughly uniform") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 10000 - 0.5) < 0.02);  // stderr ~ 0.003
}

TEST_CASE("below is bounded and hits every residue") {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) CHECK(c > 0);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("bernoulli respects degenerate and typical rates") {
  Rng rng(5);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));  // next_unit is strictly below 1
    if (rng.bernoulli(0.3)) ++hits;
  }
  CHECK(std::abs(hits / 10000.0 - 0.3) < 0.03);  // stderr ~ 0.005
}

TEST_CASE("normal has the right first two moments") {
  Rng rng(9);
  const int n = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);        // stderr ~ 0.007
  CHECK(std::abs(var - 1.0) < 0.08);   // stderr ~ 0.01
}

TEST_CASE("shuffle permutes, is seed-deterministic, and is unbiased") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  const std::vector<int> orig = v;

  Rng a(31);
  a.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == orig);  // a permutation
  CHECK(v != orig);       // and (for this seed) not the identity

  std::vector<int> w = orig;
  Rng b(31);
  b.shuffle(w);
  CHECK(w == v);  // same seed, same permutation

  std::vector<int> empty, one{42};
  Rng c(1);
  c.shuffle(empty);
  c.shuffle(one);
  CHECK(empty.empty());
  CHECK(one == std::vector<int>{42});

  // All 6 permutations of 3 elements appear at ~uniform rates.
  Rng d(17);
  std::map<std::vector<int>, int> freq;
  for (int i = 0; i < 6000; ++i) {
    std::vector<int> p{0, 1, 2};
    d.shuffle(p);
    ++freq[p];
  }
  REQUIRE(freq.size() == 6);
  for (const auto& [perm, count] : freq)
    CHECK(std::abs(count - 1000) < 150);  // stderr ~ 29
}
