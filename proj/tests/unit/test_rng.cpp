#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "zqsync/rng.hpp"

using namespace zqsync;

TEST_CASE("splitmix64 matches the reference stream") {
  // Reference outputs of splitmix64 seeded with 0 (Vigna's published generator).
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform lies in [0, 1) and has the right mean") {
  SplitMix64 rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("uniform_int covers its range evenly") {
  SplitMix64 rng(11);
  for (std::uint32_t bound : {1u, 2u, 3u, 7u, 10u}) {
    std::vector<int> counts(bound, 0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto v = rng.uniform_int(bound);
      REQUIRE(v < bound);
      ++counts[v];
    }
    const double expected = static_cast<double>(n) / bound;
    for (int c : counts) CHECK(std::abs(c - expected) < 5.0 * std::sqrt(expected) + 1e-9);
  }
}

TEST_CASE("categorical follows its weights and skips zero weights") {
  SplitMix64 rng(5);
  const std::vector<double> w = {1.0, 0.0, 3.0};
  std::vector<int> counts(3, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("bernoulli extremes") {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
}

TEST_CASE("hash_name is FNV-1a") {
  CHECK(hash_name("") == 0xcbf29ce484222325ULL);
  CHECK(hash_name("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_name("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derive_seed is deterministic and separates streams") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m)
    for (std::uint64_t s = 0; s < 4; ++s)
      for (std::uint64_t i = 0; i < 64; ++i) seen.insert(derive_seed(m, s, i));
  CHECK(seen.size() == 4 * 4 * 64);
}
