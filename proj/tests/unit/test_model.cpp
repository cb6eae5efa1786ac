#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "oracle.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"
#include "zqsync/rng.hpp"

using namespace zqsync;

TEST_CASE("kernel_zq entries") {
  const Kernel k = kernel_zq(3, 0.3);
  CHECK(k(0, 1, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(k(1, 1, 1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(k.zq_noise().value() == 0.3);
  CHECK(k.gauge_invariant());
  const Kernel noise = kernel_zq(2, 1.0);
  for (double v : noise.table()) CHECK(v == 0.5);
  const Kernel clean = kernel_zq(2, 0.0);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int y = 0; y < 2; ++y) CHECK(clean(y, x1, x2) == (y == (x1 ^ x2) ? 1.0 : 0.0));
  CHECK_THROWS(kernel_zq(1, 0.3));
  CHECK_THROWS(kernel_zq(3, 1.5));
}

TEST_CASE("property: kernel_zq against the closed form") {
  for (int q = 2; q <= 6; ++q)
    for (double p : {0.0, 0.13, 0.5, 0.91, 1.0}) {
      const Kernel k = kernel_zq(q, p);
      for (int x1 = 0; x1 < q; ++x1)
        for (int x2 = 0; x2 < q; ++x2) {
          double row = 0.0;
          for (int y = 0; y < q; ++y) {
            CHECK(k(y, x1, x2) == doctest::Approx(oracle::zq_entry(q, p, y, x1, x2)).epsilon(1e-14));
            row += k(y, x1, x2);
          }
          CHECK(row == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("general kernel validation") {
  CHECK_THROWS(Kernel(2, 2, {0.5, 0.5, 0.5}));
  CHECK_THROWS(Kernel(2, 2, {0.6, 0.6, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}));
  const Kernel asym(2, 2, {0.9, 0.1, 0.2, 0.8, 0.3, 0.7, 0.9, 0.1});
  CHECK_FALSE(asym.gauge_invariant());
}

TEST_CASE("sample_instance extremes") {
  const Graph g = gen_torus(2, 4);
  const Instance full = sample_instance(g, kernel_zq(2, 0.3), 1.0, 5);
  CHECK(full.xi == full.theta0);
  const Instance none = sample_instance(g, kernel_zq(2, 0.3), 0.0, 5);
  for (int v : none.xi) CHECK(v == kErased);
  const Instance clean = sample_instance(g, kernel_zq(2, 0.0), 0.2, 9);
  for (int e = 0; e < g.num_edges(); ++e)
    CHECK(clean.y[e] == (clean.theta0[g.edges[e].first] ^ clean.theta0[g.edges[e].second]));
  CHECK(side_channel_consistent(full));
}

TEST_CASE("sample_instance is reproducible and pins labels") {
  const Graph g = gen_cycle(7);
  const Kernel k = kernel_zq(3, 0.4);
  const Instance a = sample_instance(g, k, 0.3, 42);
  const Instance b = sample_instance(g, k, 0.3, 42);
  CHECK(a.theta0 == b.theta0);
  CHECK(a.y == b.y);
  CHECK(a.xi == b.xi);
  std::vector<double> eps(g.n, 1.0);
  eps[0] = 0.0;
  const Instance pinned = sample_instance(g, k, eps, 1, 2);
  CHECK(pinned.theta0[0] == 2);
  CHECK(pinned.xi[0] == kErased);
  CHECK(pinned.xi[1] == pinned.theta0[1]);
}

TEST_CASE("property: observation frequencies follow the kernel") {
  const Graph g = gen_cycle(20);
  const Kernel k = kernel_zq(3, 0.4);
  int agree = 0, total = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const Instance inst = sample_instance(g, k, 0.0, s);
    for (int e = 0; e < g.num_edges(); ++e) {
      const int d = ((inst.theta0[g.edges[e].first] - inst.theta0[g.edges[e].second]) % 3 + 3) % 3;
      agree += inst.y[e] == d;
      ++total;
    }
  }
  const double expected = 0.6 + 0.4 / 3.0;
  CHECK(std::abs(agree / static_cast<double>(total) - expected) < 4.0 * std::sqrt(0.25 / total));
}

TEST_CASE("channel statistics") {
  CHECK(channel_mutual_information(kernel_zq(2, 0.5)) == doctest::Approx(0.130812).epsilon(1e-6));
  const double h_cond = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
  CHECK(channel_mutual_information(kernel_zq(2, 0.5)) == doctest::Approx(std::log(2.0) - h_cond).epsilon(1e-14));
  const ChannelStatistics s = channel_statistics(kernel_zq(2, 0.5));
  CHECK(s.h_y == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(s.c_m == doctest::Approx(4.0));
  CHECK(std::isinf(channel_statistics(kernel_zq(2, 0.0)).c_m));
  for (int q = 2; q <= 5; ++q) {
    CHECK(std::abs(channel_mutual_information(kernel_zq(q, 1.0))) < 1e-14);
    CHECK(channel_mutual_information(kernel_zq(q, 0.0)) == doctest::Approx(std::log(q)).epsilon(1e-14));
  }
}

TEST_CASE("property: mutual information decreases in p") {
  for (int q = 2; q <= 5; ++q) {
    double prev = INFINITY;
    for (int i = 0; i <= 20; ++i) {
      const double v = channel_mutual_information(kernel_zq(q, i / 20.0));
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("restrict_instance follows the ball") {
  const Graph g = gen_torus(2, 4);
  const Instance inst = sample_instance(g, kernel_zq(2, 0.3), 0.5, 3);
  const Ball b = ball(g, 5, 1);
  const Instance r = restrict_instance(inst, b);
  for (std::size_t i = 0; i < b.vertices.size(); ++i) {
    CHECK(r.theta0[i] == inst.theta0[b.vertices[i]]);
    CHECK(r.xi[i] == inst.xi[b.vertices[i]]);
  }
  for (std::size_t e = 0; e < b.edge_ids.size(); ++e) CHECK(r.y[e] == inst.y[b.edge_ids[e]]);
}

TEST_CASE("kernel io round trip") {
  const Kernel k = kernel_zq(3, 0.37);
  std::stringstream ss;
  write_kernel(ss, k);
  const Kernel r = read_kernel(ss);
  CHECK(r.table() == k.table());
  std::stringstream bad("2 2 0.5 0.5");
  CHECK_THROWS(read_kernel(bad));
}
